#pragma once

#include "fdreg/data.hpp"
#include "fdreg/loss.hpp"
#include "fdreg/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fdreg {

enum class OptimizerKind { adadelta, sgd };

struct TrainConfig {
    std::size_t epochs = 500;
    std::size_t batch_size = 16;
    double lr = 1.0;
    LossConfig loss;
    std::uint64_t seed = 0;
    OptimizerKind optimizer = OptimizerKind::adadelta;

    void validate() const;
};

struct TrainReport {
    std::vector<double> train_loss;  // mean batch loss per epoch (penalties included)
    std::vector<double> val_mse;     // plain validation MSE per epoch, eval mode
    std::size_t best_epoch = 0;      // 0-based epoch achieving the minimum
    double best_val_mse = 0.0;
};

struct TrainResult {
    ParameterSet best_params;
    TrainReport report;
};

// Seeded shuffle of the given indices partitioned into ceil(n / batch_size)
// consecutive batches; the last batch may be smaller and is kept. When
// merge_trailing_singleton is set (the divergence regularizer cannot handle a
// single-row batch), a final batch of one row is merged into its predecessor.
std::vector<std::vector<std::size_t>> batch_plan(std::vector<std::size_t> indices,
                                                 std::size_t batch_size,
                                                 bool merge_trailing_singleton, Rng& rng);

// Minibatch training with the combined loss and per-epoch validation:
// each epoch reshuffles the training rows, walks the batches (forward,
// combined loss plus any L1/L2 parameter penalties, backward, optimizer
// step), then records the plain validation MSE in eval mode. The parameters
// with the smallest validation MSE are returned (earliest epoch on ties).
// Aborts with a NumericError naming the epoch/batch if the loss leaves the
// finite range. Deterministic for a fixed config.
TrainResult train(const ModelSpec& spec, const TabularDataset& data, const SplitIndices& splits,
                  const TrainConfig& cfg);

// Plain MSE of the model on the given rows, eval mode (b * d2 normalization).
double validate_mse(const ModelSpec& spec, ParameterSet& params, const TabularDataset& data,
                    const std::vector<std::size_t>& indices);

struct SweepRow {
    TrainConfig cfg;
    double best_val_mse = 0.0;
    std::size_t best_epoch = 0;
};

struct SweepResult {
    std::size_t best_index = 0;  // into rows; minimal best_val_mse, first on ties
    std::vector<SweepRow> rows;
};

// Trains every config on the same data/split (callers keep the seed identical
// across configs for a like-for-like comparison) and returns the full table.
SweepResult hyperparameter_sweep(const ModelSpec& spec, const TabularDataset& data,
                                 const SplitIndices& splits,
                                 const std::vector<TrainConfig>& cfgs);

// The shipped hyperparameter grids (strength lists and (w, gamma) pairs).
struct DefaultGrids {
    std::vector<double> l1_strengths;
    std::vector<double> l2_strengths;
    std::vector<double> dropout_probabilities;
    std::vector<std::pair<double, double>> fdiv_pairs;  // (w, gamma)
};

// Loads the JSON grid file shipped under share/. Throws LoadError on parse
// or schema problems.
DefaultGrids load_default_grids(const std::string& path);

// Writes the per-epoch report as CSV (epoch, train_loss, val_mse).
void write_train_report_csv(const std::string& path, const TrainReport& report);

}  // namespace fdreg
