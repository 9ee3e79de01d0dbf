#include <benchmark/benchmark.h>

#include "parametrix/local_time_family.hpp"
#include "parametrix/mc_oracle.hpp"
#include "parametrix/philox.hpp"
#include "parametrix/running_max_family.hpp"
#include "parametrix/special_kernels.hpp"

using namespace parametrix;

static void BM_Hermite(benchmark::State& state) {
    double y = 0.1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(kernels::hermite(2, 1.3, 0.7, y));
        y += 1e-9;
    }
}
BENCHMARK(BM_Hermite);

static void BM_ProxyDensityLocalTime(benchmark::State& state) {
    double x = -0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(proxy_density_lt(0.5, 1.0, 0.0, x, 0.3, 1.2).value);
        x += 1e-9;
    }
}
BENCHMARK(BM_ProxyDensityLocalTime);

static void BM_ProxyDensityMax(benchmark::State& state) {
    double x = -0.5;
    for (auto _ : state) {
        benchmark::DoNotOptimize(proxy_density_max(0.5, 0.0, 0.0, x, 0.3, 1.2).value);
        x += 1e-9;
    }
}
BENCHMARK(BM_ProxyDensityMax);

static void BM_KernelLocalTime(benchmark::State& state) {
    const auto f = build_field(sin_spec(0.25));
    double x = 0.3;
    for (auto _ : state) {
        benchmark::DoNotOptimize(theta_hat_lt(f, 0.4, x, 0.1, 0.7, 0.5, false));
        x += 1e-9;
    }
}
BENCHMARK(BM_KernelLocalTime);

static void BM_Philox(benchmark::State& state) {
    const CounterRng rng(7);
    std::uint64_t p = 0;
    for (auto _ : state) benchmark::DoNotOptimize(rng.uniforms(p++, 3, 0));
}
BENCHMARK(BM_Philox);

static void BM_SimulateProxyStep(benchmark::State& state) {
    SimulationPlan plan;
    plan.family = state.range(0) == 0 ? Functional::local_time : Functional::running_max;
    plan.field = build_field(sin_spec(0.25));
    plan.T = 0.25;
    plan.steps = 16;
    plan.paths = 20000;
    plan.threads = 1;
    plan.keep_samples = false;
    const State start = state.range(0) == 0 ? State{1.0, 0.0} : State{-0.3, 0.0};
    for (auto _ : state) benchmark::DoNotOptimize(simulate(plan, start).summary.mean_a);
    state.SetItemsProcessed(state.iterations() * plan.paths * plan.steps);
}
BENCHMARK(BM_SimulateProxyStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
