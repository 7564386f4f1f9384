#include <benchmark/benchmark.h>

#include "d2dalloc/dp.hpp"
#include "d2dalloc/exhaustive.hpp"
#include "d2dalloc/greedy.hpp"
#include "d2dalloc/scenario_gen.hpp"

namespace {

using namespace d2dalloc;

Scenario instance(int n_d, int m_u, int m_d, std::uint64_t seed) {
    GenConfig cfg;
    cfg.n_uc = 1;
    cfg.n_dc = 1;
    cfg.n_d = n_d;
    cfg.m_u = m_u;
    cfg.m_d = m_d;
    cfg.d2d_cluster_radius_m = 150.0;
    cfg.master_seed = seed;
    return generate(cfg);
}

void BM_DpSolve(benchmark::State& state) {
    const Scenario s = instance(static_cast<int>(state.range(0)), 2, 2, 7);
    for (auto _ : state) benchmark::DoNotOptimize(dp_solve(s));
    state.SetLabel(std::to_string(dp_solve(s).stats.states_visited) +
                   " states");
}
BENCHMARK(BM_DpSolve)->DenseRange(1, 6)->Unit(benchmark::kMillisecond);

void BM_DpSolveSixChannels(benchmark::State& state) {
    const Scenario s = instance(static_cast<int>(state.range(0)), 3, 3, 7);
    for (auto _ : state) benchmark::DoNotOptimize(dp_solve(s));
}
BENCHMARK(BM_DpSolveSixChannels)->DenseRange(2, 6, 2)
    ->Unit(benchmark::kMillisecond);

void BM_ExhaustiveSolve(benchmark::State& state) {
    const Scenario s = instance(static_cast<int>(state.range(0)), 2, 2, 7);
    for (auto _ : state) benchmark::DoNotOptimize(exhaustive_solve(s));
}
BENCHMARK(BM_ExhaustiveSolve)->DenseRange(1, 4)->Unit(benchmark::kMillisecond);

void BM_GreedySolve(benchmark::State& state) {
    const Scenario s = instance(static_cast<int>(state.range(0)), 2, 2, 7);
    for (auto _ : state) benchmark::DoNotOptimize(greedy_solve(s));
}
BENCHMARK(BM_GreedySolve)->DenseRange(2, 10, 2)->Unit(benchmark::kMicrosecond);

void BM_Generate(benchmark::State& state) {
    GenConfig cfg;
    cfg.n_d = static_cast<int>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        cfg.master_seed = seed++;
        benchmark::DoNotOptimize(generate(cfg));
    }
}
BENCHMARK(BM_Generate)->DenseRange(2, 10, 4)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
