#include <benchmark/benchmark.h>

#include <random>

#include "kreisslab/numkernel.hpp"
#include "kreisslab/oracle.hpp"
#include "kreisslab/sysnorms.hpp"

using namespace kreisslab;

namespace {

StateSpace random_system(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    auto draw = [&](int r, int c) {
        Matrix M(r, c);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) M(i, j) = nd(rng);
        return M;
    };
    Matrix A = draw(n, n);
    A -= (spectral_abscissa(A) + 0.5) * Matrix::Identity(n, n);
    return StateSpace(A, draw(n, 2), draw(2, n));
}

void BM_Expm(benchmark::State& state) {
    const StateSpace g = random_system(static_cast<int>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(expm(g.A, 0.7));
}
BENCHMARK(BM_Expm)->RangeMultiplier(2)->Range(4, 64);

void BM_Lyapunov(benchmark::State& state) {
    const StateSpace g = random_system(static_cast<int>(state.range(0)), 2);
    const Matrix W = g.B * g.B.transpose();
    for (auto _ : state) benchmark::DoNotOptimize(solve_lyapunov(g.A, W));
}
BENCHMARK(BM_Lyapunov)->RangeMultiplier(2)->Range(4, 64);

void BM_Hinf(benchmark::State& state) {
    const StateSpace g = random_system(static_cast<int>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(hinf_norm(g).value);
}
BENCHMARK(BM_Hinf)->RangeMultiplier(2)->Range(2, 32);

void BM_Kreiss(benchmark::State& state) {
    const StateSpace g = random_system(static_cast<int>(state.range(0)), 4);
    for (auto _ : state) benchmark::DoNotOptimize(kreiss_norm(g).value);
}
BENCHMARK(BM_Kreiss)->RangeMultiplier(2)->Range(2, 16)->Unit(benchmark::kMillisecond);

void BM_TransientPeak(benchmark::State& state) {
    const StateSpace g = random_system(static_cast<int>(state.range(0)), 5);
    for (auto _ : state) benchmark::DoNotOptimize(transient_peak_m0(g).value);
}
BENCHMARK(BM_TransientPeak)->RangeMultiplier(2)->Range(2, 16)->Unit(benchmark::kMillisecond);

void BM_PeakGain(benchmark::State& state) {
    const StateSpace g = random_system(static_cast<int>(state.range(0)), 6);
    for (auto _ : state) benchmark::DoNotOptimize(peak_gain(g).value);
}
BENCHMARK(BM_PeakGain)->RangeMultiplier(2)->Range(2, 16)->Unit(benchmark::kMillisecond);

void BM_OracleKreiss(benchmark::State& state) {
    const StateSpace g = random_system(4, 7);
    KreissOracleOptions o;
    o.x_points = static_cast<std::size_t>(state.range(0));
    o.omega_points = 2 * o.x_points;
    for (auto _ : state) benchmark::DoNotOptimize(oracle_kreiss(g, o).value);
}
BENCHMARK(BM_OracleKreiss)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
