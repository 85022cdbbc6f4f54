#include <benchmark/benchmark.h>

#include "wienerlab/chaos.hpp"
#include "wienerlab/distance.hpp"
#include "wienerlab/random.hpp"
#include "wienerlab/sampling.hpp"
#include "wienerlab/theorem_lab.hpp"

using namespace wienerlab;

static void BM_SymContract(benchmark::State& state) {
    const auto f = pair_sum_kernel(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(sym_contract(f, f, 1));
}
BENCHMARK(BM_SymContract)->Arg(10)->Arg(100)->Arg(1000);

static void BM_MultiplyRandom(benchmark::State& state) {
    SplitMix64 rng(1);
    const RandomChaosOptions opts{6, static_cast<int>(state.range(0)), 6, false};
    const auto f = random_chaos(rng, opts, 6);
    const auto g = random_chaos(rng, opts, 6);
    for (auto _ : state) benchmark::DoNotOptimize(multiply(f, g));
}
BENCHMARK(BM_MultiplyRandom)->DenseRange(1, 4);

static void BM_FourthMomentPairSum(benchmark::State& state) {
    const auto f = ChaosElement::integral(pair_sum_kernel(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(fourth_moment(f));
}
BENCHMARK(BM_FourthMomentPairSum)->Arg(10)->Arg(100);

static void BM_Sample(benchmark::State& state) {
    const auto f = ChaosElement::integral(pair_sum_kernel(static_cast<std::size_t>(state.range(0))));
    for (auto _ : state) benchmark::DoNotOptimize(sample(f, 10000, 7));
    state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Sample)->Arg(10)->Arg(100);

static void BM_FortetMourier(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    const auto a = sample(ChaosElement::integral(make_kernel(1, 1, {{{1}, 1.0}})), n, 1);
    const auto b = sample(ChaosElement::integral(pair_sum_kernel(5)), n, 2);
    FmOptions opts;
    opts.bootstrap.replicates = 0;
    for (auto _ : state) benchmark::DoNotOptimize(fm_two_samples(a, b, opts));
}
BENCHMARK(BM_FortetMourier)->Arg(10000)->Arg(100000);

static void BM_HistogramTv(benchmark::State& state) {
    const auto a = sample(ChaosElement::integral(make_kernel(1, 1, {{{1}, 1.0}})), 100000, 1);
    const auto b = sample(ChaosElement::integral(pair_sum_kernel(5)), 100000, 2);
    HistogramOptions opts;
    opts.bootstrap.replicates = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(tv_two_samples(a, b, opts));
}
BENCHMARK(BM_HistogramTv)->Arg(0)->Arg(200);
BENCHMARK_MAIN();
