#include "fdreg/train.hpp"

#include "fdreg/errors.hpp"
#include "fdreg/optim.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace fdreg {

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be at least 1");
    loss.validate();
    std::size_t min_batch = loss.w > 0.0 ? 2 : 1;
    if (batch_size < min_batch)
        throw std::invalid_argument(
            "TrainConfig: batch_size must be at least 2 with the divergence regularizer "
            "enabled, 1 otherwise");
}

std::vector<std::vector<std::size_t>> batch_plan(std::vector<std::size_t> indices,
                                                 std::size_t batch_size,
                                                 bool merge_trailing_singleton, Rng& rng) {
    if (indices.empty()) throw std::invalid_argument("batch_plan: empty index list");
    if (batch_size == 0) throw std::invalid_argument("batch_plan: batch_size must be positive");
    for (std::size_t i = indices.size() - 1; i > 0; --i) {
        std::size_t j = std::size_t(rng.next_below(i + 1));
        std::swap(indices[i], indices[j]);
    }
    std::vector<std::vector<std::size_t>> plan;
    for (std::size_t start = 0; start < indices.size(); start += batch_size) {
        std::size_t stop = std::min(start + batch_size, indices.size());
        plan.emplace_back(indices.begin() + std::ptrdiff_t(start),
                          indices.begin() + std::ptrdiff_t(stop));
    }
    if (merge_trailing_singleton && plan.size() > 1 && plan.back().size() == 1) {
        plan[plan.size() - 2].push_back(plan.back()[0]);
        plan.pop_back();
    }
    return plan;
}

namespace {

void check_splits(const TabularDataset& data, const SplitIndices& splits) {
    if (splits.train.empty() || splits.val.empty())
        throw std::invalid_argument("train: empty train or validation split");
    for (const auto* part : {&splits.train, &splits.val, &splits.test})
        for (std::size_t idx : *part)
            if (idx >= data.n_rows())
                throw std::invalid_argument("train: split index out of range");
}

}  // namespace

double validate_mse(const ModelSpec& spec, ParameterSet& params, const TabularDataset& data,
                    const std::vector<std::size_t>& indices) {
    if (indices.empty()) throw std::invalid_argument("validate_mse: empty index list");
    Tensor X = take_rows(data.X, indices);
    Tensor Y = take_rows(data.Y, indices);
    Tensor preds = forward(spec, params, X, Mode::eval);
    double s = 0.0;
    for (std::size_t i = 0; i < preds.numel(); ++i) {
        double diff = preds.data[i] - Y.data[i];
        s += diff * diff;
    }
    return s / double(preds.numel());
}

TrainResult train(const ModelSpec& spec, const TabularDataset& data, const SplitIndices& splits,
                  const TrainConfig& cfg) {
    cfg.validate();
    check_splits(data, splits);
    if (data.n_features() != spec.input_dim || data.n_targets() != spec.output_dim)
        throw std::invalid_argument("train: dataset width does not match the model spec");

    // Independent sub-streams so initialization, shuffling and dropout draws
    // never interleave: the same seed always produces the same run.
    Rng master(cfg.seed);
    Rng rng_init = master.substream(0);
    Rng rng_shuffle = master.substream(1);
    Rng rng_dropout = master.substream(2);

    ParameterSet params = init_params(spec, rng_init);
    AdadeltaState ada;

    TrainResult out;
    out.report.best_val_mse = std::numeric_limits<double>::infinity();
    const bool need_balance = cfg.loss.w > 0.0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto plan = batch_plan(splits.train, cfg.batch_size, need_balance, rng_shuffle);
        double loss_sum = 0.0;
        for (std::size_t bi = 0; bi < plan.size(); ++bi) {
            Tensor Xb = take_rows(data.X, plan[bi]);
            Tensor Yb = take_rows(data.Y, plan[bi]);
            ForwardCache cache;
            Tensor preds = forward(spec, params, Xb, Mode::train, &rng_dropout, &cache);
            LossResult lr = combined_loss(preds, Yb, cfg.loss);
            ParameterSet grads = backward(spec, params, cache, lr.grad);
            double penalty = 0.0;
            if (cfg.loss.l1_strength > 0.0)
                penalty += param_penalty(spec, params, PenaltyKind::L1, cfg.loss.l1_strength,
                                         &grads);
            if (cfg.loss.l2_strength > 0.0)
                penalty += param_penalty(spec, params, PenaltyKind::L2, cfg.loss.l2_strength,
                                         &grads);
            double total = lr.loss + penalty;
            if (!std::isfinite(total))
                throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch) +
                                   ", batch " + std::to_string(bi));
            loss_sum += total;
            if (cfg.optimizer == OptimizerKind::adadelta)
                adadelta_step(spec, params, grads, ada, cfg.lr);
            else
                sgd_step(spec, params, grads, cfg.lr);
        }
        out.report.train_loss.push_back(loss_sum / double(plan.size()));

        double val = validate_mse(spec, params, data, splits.val);
        if (!std::isfinite(val))
            throw NumericError("train: non-finite validation MSE at epoch " +
                               std::to_string(epoch));
        out.report.val_mse.push_back(val);
        if (val < out.report.best_val_mse) {  // strict: ties keep the earlier epoch
            out.report.best_val_mse = val;
            out.report.best_epoch = epoch;
            out.best_params = params;
        }
    }
    return out;
}

SweepResult hyperparameter_sweep(const ModelSpec& spec, const TabularDataset& data,
                                 const SplitIndices& splits,
                                 const std::vector<TrainConfig>& cfgs) {
    if (cfgs.empty()) throw std::invalid_argument("hyperparameter_sweep: no configs");
    SweepResult res;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < cfgs.size(); ++i) {
        TrainResult tr = train(spec, data, splits, cfgs[i]);
        res.rows.push_back({cfgs[i], tr.report.best_val_mse, tr.report.best_epoch});
        if (tr.report.best_val_mse < best) {  // strict: first config wins ties
            best = tr.report.best_val_mse;
            res.best_index = i;
        }
    }
    return res;
}

DefaultGrids load_default_grids(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("load_default_grids: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw LoadError("load_default_grids: parse failure in '" + path + "': " + e.what());
    }
    DefaultGrids g;
    try {
        g.l1_strengths = j.at("l1_strengths").get<std::vector<double>>();
        g.l2_strengths = j.at("l2_strengths").get<std::vector<double>>();
        g.dropout_probabilities = j.at("dropout_probabilities").get<std::vector<double>>();
        for (const auto& pair : j.at("fdiv_pairs")) {
            if (!pair.is_array() || pair.size() != 2)
                throw LoadError("load_default_grids: fdiv_pairs entries must be [w, gamma]");
            g.fdiv_pairs.emplace_back(pair[0].get<double>(), pair[1].get<double>());
        }
    } catch (const nlohmann::json::exception& e) {
        throw LoadError("load_default_grids: schema problem in '" + path + "': " + e.what());
    }
    return g;
}

void write_train_report_csv(const std::string& path, const TrainReport& report) {
    std::ofstream out(path);
    if (!out) throw LoadError("write_train_report_csv: cannot open '" + path + "'");
    out << "epoch,train_loss,val_mse\n";
    char buf[40];
    for (std::size_t e = 0; e < report.train_loss.size(); ++e) {
        out << e << ',';
        std::snprintf(buf, sizeof buf, "%.17g", report.train_loss[e]);
        out << buf << ',';
        std::snprintf(buf, sizeof buf, "%.17g", report.val_mse[e]);
        out << buf << '\n';
    }
    if (!out) throw LoadError("write_train_report_csv: write to '" + path + "' failed");
}

}  // namespace fdreg
