#include "fdreg/data.hpp"
#include "fdreg/errors.hpp"
#include "fdreg/numerics.hpp"
#include "fdreg/optim.hpp"
#include "fdreg/train.hpp"

#include <doctest.h>

#include "helpers.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

using namespace fdreg;
using testutil::TempDir;

namespace {

TabularDataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t d1,
                              std::size_t d2) {
    Rng rng(seed);
    TabularDataset ds;
    ds.X = sample_uniform(rng, -1.0, 1.0, {n, d1});
    ds.Y = sample_uniform(rng, -1.0, 1.0, {n, d2});
    return ds;
}

bool params_equal(const ParameterSet& a, const ParameterSet& b) {
    if (a.layers.size() != b.layers.size()) return false;
    for (std::size_t i = 0; i < a.layers.size(); ++i) {
        const LayerParams& la = a.layers[i];
        const LayerParams& lb = b.layers[i];
        if (la.weight.data != lb.weight.data || la.bias.data != lb.bias.data ||
            la.scale.data != lb.scale.data || la.shift.data != lb.shift.data ||
            la.run_mean.data != lb.run_mean.data || la.run_var.data != lb.run_var.data)
            return false;
    }
    return true;
}

// A from-scratch re-enactment of the documented training procedure, used as a
// procedural oracle: sub-stream 0 initializes, 1 shuffles, 2 drives dropout;
// one optimizer step per batch; checkpoint on strictly better validation MSE.
TrainResult reference_train(const ModelSpec& spec, const TabularDataset& data,
                            const SplitIndices& splits, const TrainConfig& cfg) {
    Rng master(cfg.seed);
    Rng rng_init = master.substream(0);
    Rng rng_shuffle = master.substream(1);
    Rng rng_dropout = master.substream(2);

    ParameterSet params = init_params(spec, rng_init);
    AdadeltaState ada;
    TrainResult out;
    out.report.best_val_mse = std::numeric_limits<double>::infinity();

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        auto plan =
            batch_plan(splits.train, cfg.batch_size, cfg.loss.w > 0.0, rng_shuffle);
        double loss_sum = 0.0;
        for (const auto& batch : plan) {
            Tensor Xb = take_rows(data.X, batch);
            Tensor Yb = take_rows(data.Y, batch);
            ForwardCache cache;
            Tensor preds = forward(spec, params, Xb, Mode::train, &rng_dropout, &cache);
            LossResult lr = combined_loss(preds, Yb, cfg.loss);
            ParameterSet grads = backward(spec, params, cache, lr.grad);
            double penalty = 0.0;
            if (cfg.loss.l1_strength > 0.0)
                penalty +=
                    param_penalty(spec, params, PenaltyKind::L1, cfg.loss.l1_strength, &grads);
            if (cfg.loss.l2_strength > 0.0)
                penalty +=
                    param_penalty(spec, params, PenaltyKind::L2, cfg.loss.l2_strength, &grads);
            loss_sum += lr.loss + penalty;
            adadelta_step(spec, params, grads, ada, cfg.lr);
        }
        out.report.train_loss.push_back(loss_sum / double(plan.size()));
        double val = validate_mse(spec, params, data, splits.val);
        out.report.val_mse.push_back(val);
        if (val < out.report.best_val_mse) {
            out.report.best_val_mse = val;
            out.report.best_epoch = epoch;
            out.best_params = params;
        }
    }
    return out;
}

}  // namespace

TEST_CASE("batch plan: partition sizes, coverage, and the singleton merge") {
    std::vector<std::size_t> idx(10);
    for (std::size_t i = 0; i < 10; ++i) idx[i] = i;

    Rng rng(301);
    auto plan = batch_plan(idx, 4, false, rng);
    REQUIRE(plan.size() == 3);
    CHECK(plan[0].size() == 4);
    CHECK(plan[1].size() == 4);
    CHECK(plan[2].size() == 2);

    std::vector<std::size_t> flat;
    for (const auto& b : plan) flat.insert(flat.end(), b.begin(), b.end());
    std::vector<std::size_t> sorted = flat;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == idx);   // every index exactly once
    CHECK(flat != idx);     // and the order was actually shuffled (this seed)

    // 9 rows, batch 4: the trailing single row joins its predecessor on demand
    std::vector<std::size_t> nine(idx.begin(), idx.begin() + 9);
    Rng r2(302), r3(302);
    auto merged = batch_plan(nine, 4, true, r2);
    REQUIRE(merged.size() == 2);
    CHECK(merged[0].size() == 4);
    CHECK(merged[1].size() == 5);
    auto kept = batch_plan(nine, 4, false, r3);
    REQUIRE(kept.size() == 3);
    CHECK(kept[2].size() == 1);

    // a lone row cannot merge into anything and stays a singleton plan
    Rng r4(303);
    auto lone = batch_plan({42}, 4, true, r4);
    REQUIRE(lone.size() == 1);
    CHECK(lone[0] == std::vector<std::size_t>{42});

    Rng r5(304), r6(304);
    CHECK(batch_plan(idx, 3, false, r5) == batch_plan(idx, 3, false, r6));

    Rng r7(305);
    CHECK_THROWS_AS(batch_plan({}, 4, false, r7), std::invalid_argument);
    CHECK_THROWS_AS(batch_plan(idx, 0, false, r7), std::invalid_argument);
}

TEST_CASE("validate_mse: exact values against a hand loop") {
    ModelSpec spec = build_mlp({2, 1});
    Rng rng(311);
    ParameterSet params = init_params(spec, rng);

    TabularDataset ds = random_dataset(312, 12, 2, 1);

    // zero model predicts zero: mse = mean of squared targets on those rows
    for (auto& ref : learnable_tensors(spec, params))
        std::fill(ref.tensor->data.begin(), ref.tensor->data.end(), 0.0);
    std::vector<std::size_t> rows = {0, 3, 7};
    double expect = 0.0;
    for (std::size_t r : rows) expect += ds.Y(r, 0) * ds.Y(r, 0);
    expect /= double(rows.size());
    CHECK(validate_mse(spec, params, ds, rows) == doctest::Approx(expect).epsilon(1e-12));

    CHECK_THROWS_AS(validate_mse(spec, params, ds, {}), std::invalid_argument);
}

TEST_CASE("training reproduces the documented procedure step for step") {
    ModelSpec spec = build_paper_cnn(8, 1);
    TabularDataset ds = random_dataset(321, 30, 8, 1);
    Rng split_rng(322);
    SplitIndices splits = split(30, split_rng);

    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 8;
    cfg.lr = 1.0;
    cfg.seed = 77;

    TrainResult got = train(spec, ds, splits, cfg);
    TrainResult want = reference_train(spec, ds, splits, cfg);

    CHECK(got.report.train_loss == want.report.train_loss);
    CHECK(got.report.val_mse == want.report.val_mse);
    CHECK(got.report.best_epoch == want.report.best_epoch);
    CHECK(got.report.best_val_mse == want.report.best_val_mse);
    CHECK(params_equal(got.best_params, want.best_params));
}

TEST_CASE("training with penalties and divergence matches the re-enactment too") {
    ModelSpec spec = build_mlp({3, 6, 2});
    TabularDataset ds = random_dataset(331, 40, 3, 2);
    Rng split_rng(332);
    SplitIndices splits = split(40, split_rng);

    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 8;
    cfg.seed = 9;
    cfg.loss.w = 0.01;
    cfg.loss.gamma = 0.02;
    cfg.loss.l1_strength = 0.0001;
    cfg.loss.l2_strength = 0.0005;

    TrainResult got = train(spec, ds, splits, cfg);
    TrainResult want = reference_train(spec, ds, splits, cfg);
    CHECK(got.report.train_loss == want.report.train_loss);
    CHECK(got.report.val_mse == want.report.val_mse);
    CHECK(params_equal(got.best_params, want.best_params));
}

TEST_CASE("training is deterministic for a fixed config") {
    ModelSpec spec = build_mlp({4, 5, 1});
    TabularDataset ds = random_dataset(341, 25, 4, 1);
    Rng split_rng(342);
    SplitIndices splits = split(25, split_rng);

    TrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 4;
    cfg.seed = 123;

    TrainResult a = train(spec, ds, splits, cfg);
    TrainResult b = train(spec, ds, splits, cfg);
    CHECK(a.report.train_loss == b.report.train_loss);
    CHECK(a.report.val_mse == b.report.val_mse);
    CHECK(params_equal(a.best_params, b.best_params));

    TrainConfig other = cfg;
    other.seed = 124;
    TrainResult c = train(spec, ds, splits, other);
    CHECK_FALSE(params_equal(a.best_params, c.best_params));
}

TEST_CASE("the checkpoint really is the validation minimum") {
    ModelSpec spec = build_mlp({3, 8, 1});
    TabularDataset ds = random_dataset(351, 30, 3, 1);
    Rng split_rng(352);
    SplitIndices splits = split(30, split_rng);

    TrainConfig cfg;
    cfg.epochs = 12;
    cfg.batch_size = 8;
    cfg.seed = 4;

    TrainResult res = train(spec, ds, splits, cfg);
    double rerun = validate_mse(spec, res.best_params, ds, splits.val);
    CHECK(rerun == res.report.best_val_mse);  // re-evaluation is bit-identical

    double min_val = *std::min_element(res.report.val_mse.begin(), res.report.val_mse.end());
    CHECK(res.report.best_val_mse == min_val);
    CHECK(res.report.val_mse[res.report.best_epoch] == min_val);
    // earliest epoch wins ties
    for (std::size_t e = 0; e < res.report.best_epoch; ++e)
        CHECK(res.report.val_mse[e] > min_val);
}

TEST_CASE("divergence training survives a train count that would strand one row") {
    // 9 training rows with batch 4 would leave a singleton; the plan merge
    // keeps the divergence term legal on every batch
    ModelSpec spec = build_mlp({3, 4, 1});
    TabularDataset ds = random_dataset(361, 11, 3, 1);
    SplitIndices splits;
    for (std::size_t i = 0; i < 9; ++i) splits.train.push_back(i);
    splits.val = {9};
    splits.test = {10};

    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.seed = 1;
    cfg.loss.w = 0.05;
    cfg.loss.gamma = 0.1;

    TrainResult res = train(spec, ds, splits, cfg);
    CHECK(res.report.val_mse.size() == 3);
    for (double v : res.report.val_mse) CHECK(std::isfinite(v));
}

TEST_CASE("diverging runs abort with a located numeric error") {
    ModelSpec spec = build_mlp({2, 4, 1});
    TabularDataset ds = random_dataset(371, 20, 2, 1);
    Rng split_rng(372);
    SplitIndices splits = split(20, split_rng);

    TrainConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 8;
    cfg.optimizer = OptimizerKind::sgd;
    cfg.lr = 1e18;  // guaranteed blow-up

    try {
        train(spec, ds, splits, cfg);
        FAIL("expected a numeric abort");
    } catch (const NumericError& e) {
        CHECK(std::string(e.what()).find("epoch") != std::string::npos);
    }
}

TEST_CASE("config validation: epochs, loss knobs, and the batch floor") {
    TrainConfig cfg;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.epochs = 1;
    cfg.loss.w = 0.1;
    cfg.batch_size = 1;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.batch_size = 2;
    CHECK_NOTHROW(cfg.validate());
    cfg.loss.gamma = 2.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("sweep: like-for-like table with first-wins ties") {
    ModelSpec spec = build_mlp({3, 4, 1});
    TabularDataset ds = random_dataset(381, 25, 3, 1);
    Rng split_rng(382);
    SplitIndices splits = split(25, split_rng);

    TrainConfig base;
    base.epochs = 3;
    base.batch_size = 8;
    base.seed = 6;

    TrainConfig reg = base;
    reg.loss.l2_strength = 0.001;

    SweepResult res = hyperparameter_sweep(spec, ds, splits, {base, base, reg});
    REQUIRE(res.rows.size() == 3);
    // identical configs give identical rows, and the earlier index wins
    CHECK(res.rows[0].best_val_mse == res.rows[1].best_val_mse);
    CHECK(res.best_index != 1);

    // each row matches an independent run of the same config
    TrainResult solo = train(spec, ds, splits, reg);
    CHECK(res.rows[2].best_val_mse == solo.report.best_val_mse);
    CHECK(res.rows[2].best_epoch == solo.report.best_epoch);

    CHECK_THROWS_AS(hyperparameter_sweep(spec, ds, splits, {}), std::invalid_argument);
}

TEST_CASE("the shipped hyperparameter grids load verbatim") {
    DefaultGrids g = load_default_grids(std::string(FDREG_SHARE_DIR) + "/default_grids.json");
    REQUIRE(g.l1_strengths.size() == 6);
    REQUIRE(g.l2_strengths.size() == 6);
    REQUIRE(g.dropout_probabilities.size() == 7);
    REQUIRE(g.fdiv_pairs.size() == 12);

    CHECK(g.l1_strengths ==
          std::vector<double>{0.00005, 0.0001, 0.0003, 0.0005, 0.0007, 0.001});
    CHECK(g.l2_strengths == g.l1_strengths);
    CHECK(g.dropout_probabilities ==
          std::vector<double>{0.03, 0.04, 0.05, 0.06, 0.07, 0.08, 0.1});
    CHECK(g.fdiv_pairs.front() == std::pair<double, double>(0.00005, 0.001));
    CHECK(g.fdiv_pairs[3] == std::pair<double, double>(0.0001, 0.02));
    CHECK(g.fdiv_pairs.back() == std::pair<double, double>(0.01, 0.02));
}

TEST_CASE("grid loading rejects missing, malformed, and misshapen files") {
    TempDir dir;
    CHECK_THROWS_AS(load_default_grids(dir.file("nope.json")), LoadError);

    {
        std::ofstream out(dir.file("broken.json"));
        out << "{ not json";
    }
    CHECK_THROWS_AS(load_default_grids(dir.file("broken.json")), LoadError);

    {
        std::ofstream out(dir.file("partial.json"));
        out << R"({"l1_strengths": [0.1]})";
    }
    CHECK_THROWS_AS(load_default_grids(dir.file("partial.json")), LoadError);

    {
        std::ofstream out(dir.file("badpair.json"));
        out << R"({"l1_strengths": [], "l2_strengths": [], "dropout_probabilities": [],
                   "fdiv_pairs": [[0.1]]})";
    }
    CHECK_THROWS_AS(load_default_grids(dir.file("badpair.json")), LoadError);
}

TEST_CASE("the per-epoch report round-trips through its CSV form") {
    TrainReport rep;
    rep.train_loss = {1.5, 0.75, 0.30000000000000004};
    rep.val_mse = {2.0, 1.0 / 3.0, 0.25};
    rep.best_epoch = 2;
    rep.best_val_mse = 0.25;

    TempDir dir;
    std::string path = dir.file("report.csv");
    write_train_report_csv(path, rep);

    TabularDataset back = load_csv(path, 0);
    CHECK(back.feature_names ==
          std::vector<std::string>{"epoch", "train_loss", "val_mse"});
    REQUIRE(back.n_rows() == 3);
    for (std::size_t e = 0; e < 3; ++e) {
        CHECK(back.X(e, 0) == double(e));
        CHECK(back.X(e, 1) == rep.train_loss[e]);  // %.17g is bit-faithful
        CHECK(back.X(e, 2) == rep.val_mse[e]);
    }
}
