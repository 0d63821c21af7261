#pragma once

#include "fdreg/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace fdreg {

// Which empirical risk the grid search minimizes: plain mean squared error or
// the squared gap between the exact graph divergence and its target value.
enum class SimLoss { mse, fdiv };

// The quadratic-recovery experiment: data y = a x^2 + b x + noise, candidates
// (a, b) on a square grid, one winner per freshly drawn dataset.
struct SimConfig {
    double a_true = 0.4;
    double b_true = 0.4;
    double sigma = 2.0;  // noise standard deviation
    std::size_t n_points = 30;
    double grid_lo = 0.2;
    double grid_hi = 0.6;
    double grid_step = 0.1;
    double gamma = 0.5;  // divergence target for the fdiv risk
    std::size_t runs = 200;
    std::uint64_t seed = 0;

    // Grid coordinates lo, lo + step, ... (inclusive of hi up to rounding).
    std::vector<double> grid_values() const;

    // Step must be positive and the grid must contain the true pair.
    void validate() const;
};

// How often each grid cell won, accumulated over all runs. Counts are stored
// a-major: counts[ia * grid_size + ib].
struct FrequencyMap {
    std::size_t grid_size = 0;
    std::vector<std::size_t> counts;
    std::size_t runs = 0;

    std::size_t& at(std::size_t ia, std::size_t ib) { return counts[ia * grid_size + ib]; }
    std::size_t at(std::size_t ia, std::size_t ib) const { return counts[ia * grid_size + ib]; }
};

// Draws one dataset from rng, evaluates the chosen risk at every grid pair and
// returns the minimizer. Exact risk ties are broken uniformly at random using
// the same rng; no draw is consumed when the minimum is unique.
std::pair<double, double> grid_search_once(Rng& rng, const SimConfig& cfg, SimLoss kind);

struct SimulationResult {
    FrequencyMap mse;
    FrequencyMap fdiv;
};

// Repeats the grid search cfg.runs times. Run r uses rng sub-stream r, and
// both risks receive value copies of that stream, so they score identical
// datasets; each map's counts sum to cfg.runs.
SimulationResult run_simulation(const SimConfig& cfg);

// One row per grid cell: a,b,count_mse,count_fdiv.
void write_frequency_csv(const std::string& path, const SimConfig& cfg,
                         const SimulationResult& res);

}  // namespace fdreg
