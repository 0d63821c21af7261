#include "cli.hpp"

#include "fdreg/data.hpp"
#include "fdreg/divergence.hpp"
#include "fdreg/errors.hpp"
#include "fdreg/eval.hpp"
#include "fdreg/model.hpp"
#include "fdreg/model_io.hpp"
#include "fdreg/sim.hpp"
#include "fdreg/train.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

namespace fdreg::cli {
namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string shortest(double v) {
    char buf[32];
    auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

double parse_number(const std::string& text, const std::string& what) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last)
        throw std::invalid_argument("--reg: cannot parse number '" + text + "' in " + what);
    return value;
}

// One --reg occurrence each of none | l1:S | l2:S | dropout:P |
// fdiv:w=W,gamma=G[,lambda=L]; the kinds combine, "none" stands alone.
struct RegSettings {
    LossConfig loss;
    std::optional<double> dropout;
};

RegSettings parse_regs(const std::vector<std::string>& specs) {
    RegSettings out;
    bool got_none = false, got_l1 = false, got_l2 = false, got_dropout = false,
         got_fdiv = false;
    for (const std::string& s : specs) {
        if (s == "none") {
            got_none = true;
            continue;
        }
        auto colon = s.find(':');
        std::string kind = s.substr(0, colon);
        std::string rest = colon == std::string::npos ? std::string() : s.substr(colon + 1);
        auto reject_duplicate = [&](bool& seen) {
            if (seen) throw std::invalid_argument("--reg: duplicate '" + kind + "' regularizer");
            seen = true;
        };
        if (kind == "l1") {
            reject_duplicate(got_l1);
            out.loss.l1_strength = parse_number(rest, "l1 strength");
        } else if (kind == "l2") {
            reject_duplicate(got_l2);
            out.loss.l2_strength = parse_number(rest, "l2 strength");
        } else if (kind == "dropout") {
            reject_duplicate(got_dropout);
            double rate = parse_number(rest, "dropout probability");
            if (!(rate >= 0.0 && rate < 1.0))
                throw std::invalid_argument("--reg: dropout probability must lie in [0, 1)");
            out.dropout = rate;
        } else if (kind == "fdiv") {
            reject_duplicate(got_fdiv);
            bool got_w = false, got_gamma = false;
            std::size_t pos = 0;
            while (pos <= rest.size()) {
                std::size_t comma = rest.find(',', pos);
                std::string item =
                    rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
                pos = comma == std::string::npos ? rest.size() + 1 : comma + 1;
                if (item.empty() && pos > rest.size()) break;
                auto eq = item.find('=');
                if (eq == std::string::npos)
                    throw std::invalid_argument("--reg: expected key=value in fdiv, got '" +
                                                item + "'");
                std::string key = item.substr(0, eq);
                double value = parse_number(item.substr(eq + 1), "fdiv " + key);
                if (key == "w") {
                    out.loss.w = value;
                    got_w = true;
                } else if (key == "gamma") {
                    out.loss.gamma = value;
                    got_gamma = true;
                } else if (key == "lambda") {
                    out.loss.lambda = value;
                } else {
                    throw std::invalid_argument("--reg: unknown fdiv key '" + key + "'");
                }
            }
            if (!got_w || !got_gamma)
                throw std::invalid_argument("--reg: fdiv needs both w= and gamma=");
        } else {
            throw std::invalid_argument("--reg: unknown regularizer '" + s + "'");
        }
    }
    bool any = got_l1 || got_l2 || got_dropout || got_fdiv;
    if (got_none && any)
        throw std::invalid_argument("--reg: 'none' cannot combine with other regularizers");
    return out;
}

// model.json -> model_report.csv; anything else just gains the suffix.
std::string derive_report_path(const std::string& out_path) {
    const std::string ext = ".json";
    if (out_path.size() > ext.size() &&
        out_path.compare(out_path.size() - ext.size(), ext.size(), ext) == 0)
        return out_path.substr(0, out_path.size() - ext.size()) + "_report.csv";
    return out_path + "_report.csv";
}

Scaler identity_scaler(std::size_t width) {
    Scaler s;
    s.mean.assign(width, 0.0);
    s.std_dev.assign(width, 1.0);
    return s;
}

int cmd_divergence(std::ostream& out, const std::string& a_path, const std::string& b_path,
                   bool smoothed, double lambda) {
    TabularDataset a = load_csv(a_path, 0);
    TabularDataset b = load_csv(b_path, 0);
    LabeledPointSet sets{a.X, b.X};
    DivergenceReport rep =
        smoothed ? hp_divergence_smoothed(sets, lambda) : hp_divergence_exact(sets);
    out << "n0,n1,cut_mass,d_raw,d_clamped\n";
    out << sets.n0() << ',' << sets.n1() << ',' << fmt(rep.cut_mass) << ',' << fmt(rep.d_raw)
        << ',' << fmt(rep.d_clamped) << '\n';
    return 0;
}

int cmd_train(std::ostream& out, const std::string& data_path, std::size_t n_targets,
              const RegSettings& reg, const TrainConfig& cfg_in, std::uint64_t split_seed,
              bool standardize, const std::string& out_path, std::string report_path) {
    TabularDataset ds = load_csv(data_path, n_targets);

    Rng split_rng = Rng(split_seed).substream(3);
    SplitIndices splits = split(ds.n_rows(), split_rng);

    Scaler scaler = identity_scaler(ds.n_features());
    if (standardize) {
        scaler = standardize_fit(take_rows(ds.X, splits.train));
        ds.X = standardize_apply(scaler, ds.X);
    }

    ModelSpec spec = build_paper_cnn(ds.n_features(), ds.n_targets());
    if (reg.dropout) {
        for (std::size_t i = 0; i < spec.layers.size(); ++i) {
            if (std::holds_alternative<FlattenSpec>(spec.layers[i])) {
                spec.layers.insert(spec.layers.begin() + std::ptrdiff_t(i) + 1,
                                   DropoutSpec{*reg.dropout});
                break;
            }
        }
    }

    TrainConfig cfg = cfg_in;
    cfg.loss = reg.loss;
    TrainResult res = train(spec, ds, splits, cfg);

    save_model(out_path, SavedModel{spec, res.best_params, scaler});
    if (report_path.empty()) report_path = derive_report_path(out_path);
    write_train_report_csv(report_path, res.report);

    out << "best_epoch,best_val_mse\n";
    out << res.report.best_epoch << ',' << fmt(res.report.best_val_mse) << '\n';
    return 0;
}

Tensor model_predictions(SavedModel& model, const TabularDataset& ds) {
    if (ds.n_features() != model.spec.input_dim)
        throw LoadError("data has " + std::to_string(ds.n_features()) +
                        " features, model expects " + std::to_string(model.spec.input_dim));
    Tensor X = standardize_apply(model.scaler, ds.X);
    return forward(model.spec, model.params, X, Mode::eval);
}

int cmd_evaluate(std::ostream& out, const std::string& model_path,
                 const std::string& data_path) {
    SavedModel model = load_model(model_path);
    TabularDataset ds = load_csv(data_path, model.spec.output_dim);
    EvalReport rep = rmse(model_predictions(model, ds), ds.Y);
    out << "target,rmse\n";
    out << "0," << fmt(rep.overall) << '\n';  // target 0 is the overall row
    for (std::size_t j = 0; j < rep.per_target.size(); ++j)
        out << (j + 1) << ',' << fmt(rep.per_target[j]) << '\n';
    return 0;
}

int cmd_compare(std::ostream& out, const std::string& a_path, const std::string& b_path,
                const std::string& data_path, double level) {
    SavedModel a = load_model(a_path);
    SavedModel b = load_model(b_path);
    if (a.spec.input_dim != b.spec.input_dim || a.spec.output_dim != b.spec.output_dim)
        throw LoadError("compare: the two models disagree on input/output width");
    TabularDataset ds = load_csv(data_path, a.spec.output_dim);
    Tensor pa = model_predictions(a, ds);
    Tensor pb = model_predictions(b, ds);
    EvalReport ra = rmse(pa, ds.Y);
    EvalReport rb = rmse(pb, ds.Y);

    const std::size_t n = ds.n_rows(), d2 = ds.n_targets();
    auto row_errors = [&](const Tensor& preds, std::size_t target) {
        // target 0: per-row mean squared error over all targets; otherwise the
        // per-row squared error of that one target column
        std::vector<double> e(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            if (target == 0) {
                double s = 0.0;
                for (std::size_t j = 0; j < d2; ++j) {
                    double diff = preds(i, j) - ds.Y(i, j);
                    s += diff * diff;
                }
                e[i] = s / double(d2);
            } else {
                double diff = preds(i, target - 1) - ds.Y(i, target - 1);
                e[i] = diff * diff;
            }
        }
        return e;
    };

    out << "target,rmse_a,rmse_b,t,p,verdict\n";
    for (std::size_t target = 0; target <= d2; ++target) {
        TTestResult tt = paired_t_test(row_errors(pa, target), row_errors(pb, target), level);
        double rmse_a = target == 0 ? ra.overall : ra.per_target[target - 1];
        double rmse_b = target == 0 ? rb.overall : rb.per_target[target - 1];
        out << target << ',' << fmt(rmse_a) << ',' << fmt(rmse_b) << ',' << fmt(tt.t) << ','
            << fmt(tt.p) << ',' << (tt.significant ? 1 : 0) << '\n';
    }
    return 0;
}

int cmd_simulate(std::ostream& out, const SimConfig& cfg, const std::string& out_path) {
    SimulationResult res = run_simulation(cfg);
    write_frequency_csv(out_path, cfg, res);
    // summary row: the hit counts at the true coefficient pair
    std::vector<double> grid = cfg.grid_values();
    std::size_t ia = std::size_t(std::llround((cfg.a_true - cfg.grid_lo) / cfg.grid_step));
    std::size_t ib = std::size_t(std::llround((cfg.b_true - cfg.grid_lo) / cfg.grid_step));
    out << "a,b,count_mse,count_fdiv\n";
    out << shortest(grid[ia]) << ',' << shortest(grid[ib]) << ',' << res.mse.at(ia, ib) << ','
        << res.fdiv.at(ia, ib) << '\n';
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Nearest-neighbor divergence tools: estimation, regularized training, "
                 "evaluation, comparison, and the grid-search frequency experiment"};
    app.name("fdreg");
    app.require_subcommand(1);

    // divergence
    std::string div_a, div_b;
    bool div_smoothed = false;
    double div_lambda = 2.0;
    CLI::App* div = app.add_subcommand("divergence", "Estimate the divergence between two CSV "
                                                     "point clouds");
    div->add_option("--a", div_a, "first point cloud (CSV, no target columns)")->required();
    div->add_option("--b", div_b, "second point cloud (CSV, no target columns)")->required();
    div->add_flag("--smoothed", div_smoothed, "use the differentiable softmax relaxation");
    div->add_option("--lambda", div_lambda, "softmax scale for --smoothed")
        ->capture_default_str();

    // train
    std::string tr_data, tr_out, tr_report;
    std::size_t tr_targets = 0;
    std::vector<std::string> tr_regs;
    TrainConfig tr_cfg;
    bool tr_no_standardize = false;
    std::uint64_t tr_split_seed = 0;
    CLI::App* tr = app.add_subcommand("train", "Train the 1-D CNN on a CSV dataset");
    tr->add_option("--data", tr_data, "training table (last --targets columns are targets)")
        ->required();
    tr->add_option("--targets", tr_targets, "number of target columns")
        ->required()
        ->check(CLI::PositiveNumber);
    tr->add_option("--reg", tr_regs,
                   "regularizer: none | l1:S | l2:S | dropout:P | "
                   "fdiv:w=W,gamma=G[,lambda=L]; repeat to combine");
    tr->add_option("--epochs", tr_cfg.epochs, "training epochs")->capture_default_str();
    tr->add_option("--batch", tr_cfg.batch_size, "minibatch size")->capture_default_str();
    tr->add_option("--lr", tr_cfg.lr, "optimizer scale factor")->capture_default_str();
    tr->add_option("--seed", tr_cfg.seed, "run seed")->capture_default_str();
    CLI::Option* tr_split_opt =
        tr->add_option("--split-seed", tr_split_seed,
                       "seed for the train/val/test split (defaults to --seed, i.e. the "
                       "split is re-drawn per run)");
    tr->add_option("--out", tr_out, "output model JSON path")->required();
    tr->add_option("--report", tr_report,
                   "per-epoch report CSV path (default: model path with _report.csv)");
    tr->add_flag("--no-standardize", tr_no_standardize,
                 "skip feature standardization (store an identity scaler)");

    // evaluate
    std::string ev_model, ev_data;
    CLI::App* ev = app.add_subcommand("evaluate", "Report per-target and overall test RMSE");
    ev->add_option("--model", ev_model, "model JSON")->required();
    ev->add_option("--data", ev_data, "evaluation table")->required();

    // compare
    std::string cp_a, cp_b, cp_data;
    double cp_level = 0.1;
    CLI::App* cp = app.add_subcommand("compare", "Compare two models with paired t-tests");
    cp->add_option("--model-a", cp_a, "first model JSON")->required();
    cp->add_option("--model-b", cp_b, "second model JSON")->required();
    cp->add_option("--data", cp_data, "evaluation table")->required();
    cp->add_option("--level", cp_level, "significance level")->capture_default_str();

    // simulate
    SimConfig sim_cfg;
    std::string sim_out;
    CLI::App* sim = app.add_subcommand("simulate", "Quadratic-recovery grid-search frequency "
                                                   "experiment");
    sim->add_option("--runs", sim_cfg.runs, "independent repetitions")->capture_default_str();
    sim->add_option("--seed", sim_cfg.seed, "base seed")->capture_default_str();
    sim->add_option("--out", sim_out, "frequency map CSV path")->required();
    sim->add_option("--sigma", sim_cfg.sigma, "noise standard deviation")
        ->capture_default_str();
    sim->add_option("--n-points", sim_cfg.n_points, "points per dataset")
        ->capture_default_str();
    sim->add_option("--gamma", sim_cfg.gamma, "divergence target")->capture_default_str();
    sim->add_option("--a-true", sim_cfg.a_true, "true quadratic coefficient")
        ->capture_default_str();
    sim->add_option("--b-true", sim_cfg.b_true, "true linear coefficient")
        ->capture_default_str();
    sim->add_option("--grid-lo", sim_cfg.grid_lo, "grid lower bound")->capture_default_str();
    sim->add_option("--grid-hi", sim_cfg.grid_hi, "grid upper bound")->capture_default_str();
    sim->add_option("--grid-step", sim_cfg.grid_step, "grid spacing")->capture_default_str();

    try {
        std::vector<const char*> argv;
        argv.push_back("fdreg");
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;  // --help exits 0, every parse problem is a usage error
    }

    try {
        if (div->parsed()) return cmd_divergence(out, div_a, div_b, div_smoothed, div_lambda);
        if (tr->parsed()) {
            RegSettings reg = parse_regs(tr_regs);
            std::uint64_t split_seed = tr_split_opt->count() ? tr_split_seed : tr_cfg.seed;
            return cmd_train(out, tr_data, tr_targets, reg, tr_cfg, split_seed,
                             !tr_no_standardize, tr_out, tr_report);
        }
        if (ev->parsed()) return cmd_evaluate(out, ev_model, ev_data);
        if (cp->parsed()) return cmd_compare(out, cp_a, cp_b, cp_data, cp_level);
        if (sim->parsed()) return cmd_simulate(out, sim_cfg, sim_out);
        err << "error: no subcommand\n";
        return 1;
    } catch (const NumericError& e) {
        err << "numeric error: " << e.what() << '\n';
        return 3;
    } catch (const LoadError& e) {
        err << "data error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace fdreg::cli
