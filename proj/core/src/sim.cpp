#include "fdreg/sim.hpp"

#include "fdreg/data.hpp"
#include "fdreg/divergence.hpp"
#include "fdreg/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <system_error>

namespace fdreg {

std::vector<double> SimConfig::grid_values() const {
    std::size_t count = std::size_t(std::floor((grid_hi - grid_lo) / grid_step + 0.5)) + 1;
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        double raw = grid_lo + double(i) * grid_step;
        // snap accumulated float error (0.2 + 0.1 != 0.3) back to the decimal
        // coordinate the grid is meant to sample
        v[i] = std::round(raw * 1e12) / 1e12;
    }
    return v;
}

void SimConfig::validate() const {
    if (!(grid_step > 0.0)) throw std::invalid_argument("SimConfig: grid_step must be positive");
    if (grid_hi < grid_lo) throw std::invalid_argument("SimConfig: grid_hi below grid_lo");
    if (runs < 1) throw std::invalid_argument("SimConfig: runs must be at least 1");
    if (n_points < 1) throw std::invalid_argument("SimConfig: n_points must be at least 1");
    if (!(sigma >= 0.0)) throw std::invalid_argument("SimConfig: sigma must be nonnegative");
    auto contains = [&](double target) {
        for (double v : grid_values())
            if (std::abs(v - target) <= 1e-9) return true;
        return false;
    };
    if (!contains(a_true) || !contains(b_true))
        throw std::invalid_argument("SimConfig: grid must contain the true (a, b) pair");
}

namespace {

std::size_t index_of(const std::vector<double>& grid, double value) {
    for (std::size_t i = 0; i < grid.size(); ++i)
        if (grid[i] == value) return i;  // values come straight from this grid
    throw std::logic_error("frequency map: chosen value is not a grid coordinate");
}

void append_double(std::string& line, double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);  // shortest round-trip form
    line.append(buf, r.ptr);
}

}  // namespace

std::pair<double, double> grid_search_once(Rng& rng, const SimConfig& cfg, SimLoss kind) {
    cfg.validate();
    TabularDataset ds = gen_quadratic(rng, cfg.n_points, cfg.a_true, cfg.b_true, cfg.sigma);
    const std::vector<double> grid = cfg.grid_values();
    const std::size_t g = grid.size();
    const std::size_t n = cfg.n_points;

    std::vector<double> risks(g * g);
    Tensor preds({n, 1});
    for (std::size_t ia = 0; ia < g; ++ia) {
        for (std::size_t ib = 0; ib < g; ++ib) {
            double a = grid[ia], b = grid[ib];
            for (std::size_t i = 0; i < n; ++i) {
                double x = ds.X(i, 0);
                preds(i, 0) = a * x * x + b * x;
            }
            double risk;
            if (kind == SimLoss::mse) {
                double s = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    double diff = preds(i, 0) - ds.Y(i, 0);
                    s += diff * diff;
                }
                risk = s / double(n);
            } else {
                LabeledPointSet sets{ds.Y, preds};
                double d_raw = hp_divergence_exact(sets).d_raw;
                risk = (d_raw - cfg.gamma) * (d_raw - cfg.gamma);
            }
            risks[ia * g + ib] = risk;
        }
    }

    double best = std::numeric_limits<double>::infinity();
    for (double r : risks) best = std::min(best, r);
    std::vector<std::size_t> minimizers;
    for (std::size_t c = 0; c < risks.size(); ++c)
        if (risks[c] == best) minimizers.push_back(c);
    std::size_t pick =
        minimizers.size() == 1 ? minimizers[0] : minimizers[std::size_t(rng.next_below(
                                                     std::uint64_t(minimizers.size())))];
    return {grid[pick / g], grid[pick % g]};
}

SimulationResult run_simulation(const SimConfig& cfg) {
    cfg.validate();
    const std::vector<double> grid = cfg.grid_values();
    SimulationResult res;
    for (FrequencyMap* m : {&res.mse, &res.fdiv}) {
        m->grid_size = grid.size();
        m->counts.assign(grid.size() * grid.size(), 0);
        m->runs = cfg.runs;
    }
    Rng master(cfg.seed);
    for (std::size_t r = 0; r < cfg.runs; ++r) {
        Rng sub = master.substream(std::uint64_t(r));
        Rng rng_mse = sub;   // value copies: both risks score the same dataset
        Rng rng_fdiv = sub;
        auto pm = grid_search_once(rng_mse, cfg, SimLoss::mse);
        auto pf = grid_search_once(rng_fdiv, cfg, SimLoss::fdiv);
        res.mse.at(index_of(grid, pm.first), index_of(grid, pm.second)) += 1;
        res.fdiv.at(index_of(grid, pf.first), index_of(grid, pf.second)) += 1;
    }
    return res;
}

void write_frequency_csv(const std::string& path, const SimConfig& cfg,
                         const SimulationResult& res) {
    std::ofstream out(path);
    if (!out) throw LoadError("write_frequency_csv: cannot open '" + path + "'");
    const std::vector<double> grid = cfg.grid_values();
    out << "a,b,count_mse,count_fdiv\n";
    for (std::size_t ia = 0; ia < grid.size(); ++ia) {
        for (std::size_t ib = 0; ib < grid.size(); ++ib) {
            std::string line;
            append_double(line, grid[ia]);
            line += ',';
            append_double(line, grid[ib]);
            out << line << ',' << res.mse.at(ia, ib) << ',' << res.fdiv.at(ia, ib) << '\n';
        }
    }
    if (!out) throw LoadError("write_frequency_csv: write to '" + path + "' failed");
}

}  // namespace fdreg
