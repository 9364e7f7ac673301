#include <benchmark/benchmark.h>

#include <cstdint>

#include "ajsim/analysis.hpp"
#include "ajsim/em.hpp"
#include "ajsim/noise.hpp"
#include "ajsim/rng.hpp"

using namespace ajsim;

namespace {

ModelParams mean_reverting() {
    ModelParams p;
    p.a_neg1 = 0.3;
    p.a0 = 0.5;
    p.a1 = 0.5;
    p.a2 = 0.6;
    p.gamma = 1.5;
    p.sigma = 0.3;
    p.rho = 1.2;
    p.delta = 0.05;
    p.lambda = 1.0;
    return p;
}

void BM_PhiloxNormal(benchmark::State& state) {
    PhiloxStream s(42, 7, StreamTag::brownian);
    for (auto _ : state) benchmark::DoNotOptimize(s.normal());
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxNormal);

void BM_PhiloxPoisson(benchmark::State& state) {
    PhiloxStream s(42, 7, StreamTag::poisson);
    for (auto _ : state) benchmark::DoNotOptimize(s.poisson(1e-3));
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_PhiloxPoisson);

void BM_EmStep(benchmark::State& state) {
    const auto p = mean_reverting();
    double y = 1.0;
    for (auto _ : state) {
        const auto r = em_step(p, y, 1e-3, 0.01, 0);
        benchmark::DoNotOptimize(r);
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_EmStep);

void BM_GenerateNoise(benchmark::State& state) {
    const auto grid = SimGrid::from_steps(1.0, static_cast<std::size_t>(state.range(0)));
    std::uint64_t path = 0;
    for (auto _ : state) benchmark::DoNotOptimize(generate_noise(grid, 1.0, 3, path++));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateNoise)->Arg(1000)->Arg(100000);

void BM_SimulatePath(benchmark::State& state) {
    const auto p = mean_reverting();
    const auto noise = generate_noise(SimGrid::from_steps(1.0, static_cast<std::size_t>(state.range(0))), 1.0, 3, 0);
    for (auto _ : state) benchmark::DoNotOptimize(simulate_path(p, noise));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SimulatePath)->Arg(1000)->Arg(100000);

void BM_MomentCurve(benchmark::State& state) {
    const auto p = mean_reverting();
    const auto grid = SimGrid::from_dt(1.0, 1e-3);
    Ensemble e;
    e.n_paths = 1000;
    e.threads = static_cast<unsigned>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(moment_curve(p, 2.0, grid, e));
    state.SetItemsProcessed(state.iterations() * 1000 * 1000);
}
BENCHMARK(BM_MomentCurve)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
