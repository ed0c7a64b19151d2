// Wall-clock comparison of the two Gramian routes plus the hot inner
// pieces (one implicit step, greedy selection). The variational route
// walks the trajectory once with exact step Jacobians; the empirical
// route needs 2 n_x full simulations, so the gap widens with state
// dimension and horizon.

#include <benchmark/benchmark.h>

#include <random>

#include <vargram/vargram.hpp>

namespace {

using namespace vargram;

SystemModel surrogate() {
    static const SystemModel m = load_model(
        std::string(VARGRAM_SOURCE_CONFIG_DIR) + "/models/h2o2_surrogate.json");
    return m;
}

Vector surrogate_x0() {
    Vector x0(9);
    x0 << 1.0, 0.02, 0.01, 0.6, 0.015, 0.1, 0.005, 0.02, 0.5;
    return x0;
}

void bench_variational_gramian(benchmark::State& state) {
    const SystemModel m = surrogate();
    const Vector x0 = surrogate_x0();
    IrkConfig cfg;
    cfg.step_size = 0.001;
    const Index n = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(variational_gramian(m, x0, n, cfg));
    }
}
BENCHMARK(bench_variational_gramian)->Arg(100)->Arg(400)->Arg(1000);

void bench_empirical_gramian(benchmark::State& state) {
    const SystemModel m = surrogate();
    const Vector x0 = surrogate_x0();
    IrkConfig cfg;
    cfg.step_size = 0.001;
    const Index n = state.range(0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(empirical_gramian(m, x0, n, 1e-4, cfg));
    }
}
BENCHMARK(bench_empirical_gramian)->Arg(100)->Arg(400)->Arg(1000);

void bench_irk_step(benchmark::State& state) {
    const SystemModel m = surrogate();
    const Vector x0 = surrogate_x0();
    IrkConfig cfg;
    cfg.step_size = 0.001;
    for (auto _ : state) {
        benchmark::DoNotOptimize(irk_step(m, x0, cfg));
    }
}
BENCHMARK(bench_irk_step);

void bench_greedy_select(benchmark::State& state) {
    const SystemModel m = surrogate();
    IrkConfig cfg;
    cfg.step_size = 0.001;
    const PerSensorGramians gs = per_sensor_gramians(m, surrogate_x0(), 200, cfg);
    const double delta = default_delta(gs);
    const int budget = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(greedy_select(gs, budget, delta));
    }
}
BENCHMARK(bench_greedy_select)->Arg(3)->Arg(6)->Arg(9);

} // namespace

BENCHMARK_MAIN();
