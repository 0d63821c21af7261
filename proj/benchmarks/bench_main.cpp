#include "fdreg/data.hpp"
#include "fdreg/divergence.hpp"
#include "fdreg/loss.hpp"
#include "fdreg/model.hpp"
#include "fdreg/numerics.hpp"
#include "fdreg/optim.hpp"
#include "fdreg/rng.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace fdreg;

LabeledPointSet make_clouds(std::size_t n_per_side, std::size_t dim) {
    Rng rng(42);
    return {sample_gaussian(rng, 0.0, 1.0, {n_per_side, dim}),
            sample_gaussian(rng, 0.5, 1.0, {n_per_side, dim})};
}

void BM_pairwise_distances(benchmark::State& state) {
    std::size_t n = std::size_t(state.range(0));
    LabeledPointSet sets = make_clouds(n, 3);
    for (auto _ : state)
        benchmark::DoNotOptimize(pairwise_distances(sets.points_a, sets.points_b));
}
BENCHMARK(BM_pairwise_distances)->Arg(64)->Arg(256);

void BM_nn_cut_count(benchmark::State& state) {
    std::size_t n = std::size_t(state.range(0)) / 2;
    LabeledPointSet sets = make_clouds(n, 3);
    for (auto _ : state) benchmark::DoNotOptimize(nn_cut_count(sets));
}
BENCHMARK(BM_nn_cut_count)->Arg(64)->Arg(256);

void BM_smoothed_cut_mass(benchmark::State& state) {
    std::size_t n = std::size_t(state.range(0)) / 2;
    LabeledPointSet sets = make_clouds(n, 3);
    for (auto _ : state) benchmark::DoNotOptimize(smoothed_cut_mass(sets, 2.0));
}
BENCHMARK(BM_smoothed_cut_mass)->Arg(64)->Arg(256);

void BM_smoothed_divergence_grad(benchmark::State& state) {
    std::size_t n = std::size_t(state.range(0)) / 2;
    LabeledPointSet sets = make_clouds(n, 3);
    for (auto _ : state) benchmark::DoNotOptimize(smoothed_divergence_grad(sets, 2.0));
}
BENCHMARK(BM_smoothed_divergence_grad)->Arg(64)->Arg(256);

void BM_cnn_forward(benchmark::State& state) {
    ModelSpec spec = build_paper_cnn(64, 3);
    Rng rng(1);
    ParameterSet params = init_params(spec, rng);
    Tensor batch = sample_gaussian(rng, 0.0, 1.0, {16, 64});
    for (auto _ : state) benchmark::DoNotOptimize(forward(spec, params, batch, Mode::eval));
}
BENCHMARK(BM_cnn_forward);

// One full optimizer step on a batch of 16: forward with cache, combined
// loss, backward, Adadelta update.
void BM_cnn_train_step(benchmark::State& state) {
    ModelSpec spec = build_paper_cnn(64, 3);
    Rng rng(1);
    ParameterSet params = init_params(spec, rng);
    Tensor batch = sample_gaussian(rng, 0.0, 1.0, {16, 64});
    Tensor targets = sample_gaussian(rng, 0.0, 1.0, {16, 3});
    LossConfig loss;
    loss.w = 0.001;
    loss.gamma = 0.02;
    AdadeltaState ada;
    for (auto _ : state) {
        ForwardCache cache;
        Tensor preds = forward(spec, params, batch, Mode::train, &rng, &cache);
        LossResult lr = combined_loss(preds, targets, loss);
        ParameterSet grads = backward(spec, params, cache, lr.grad);
        adadelta_step(spec, params, grads, ada, 1.0);
        benchmark::DoNotOptimize(params);
    }
}
BENCHMARK(BM_cnn_train_step);

void BM_adadelta_step(benchmark::State& state) {
    ModelSpec spec = build_paper_cnn(64, 3);
    Rng rng(1);
    ParameterSet params = init_params(spec, rng);
    ParameterSet grads = init_params(spec, rng);
    AdadeltaState ada;
    for (auto _ : state) {
        adadelta_step(spec, params, grads, ada, 1.0);
        benchmark::DoNotOptimize(params);
    }
}
BENCHMARK(BM_adadelta_step);

}  // namespace

BENCHMARK_MAIN();
