#include <benchmark/benchmark.h>

#include "kreisslab/certify.hpp"
#include "kreisslab/lmi.hpp"
#include "kreisslab/synthesis.hpp"

using namespace kreisslab;

namespace {

ControllerRealization first_order() { return ControllerRealization::from_transfer({0.001071, -2.247}, {1, 1.483}); }

void BM_Simulate(benchmark::State& state) {
    const NonlinearModel m = NonlinearModel::brunton2();
    Vector x0(2);
    x0 << 0.01, 0.0;
    const ControllerRealization K = first_order();
    for (auto _ : state) benchmark::DoNotOptimize(simulate_closed_loop(m, K, x0, 50.0, 120.0).final_state());
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

void BM_QcAnalysis(benchmark::State& state) {
    Matrix C = Matrix::Zero(1, 3);
    C(0, 0) = 1.0;
    const NonlinearModel m = NonlinearModel::lorenz(LorenzParams{}, C);
    const ClosedLoop cl =
        assemble_closed_loop(m.plant(), ControllerRealization::from_transfer({-306.5, -2809}, {1, 0.1044}));
    for (auto _ : state) benchmark::DoNotOptimize(qc_analysis(cl).feasible);
}
BENCHMARK(BM_QcAnalysis)->Unit(benchmark::kMillisecond);

void BM_WorstCaseDelta(benchmark::State& state) {
    const ClosedLoop cl = assemble_closed_loop(NonlinearModel::brunton2().plant(), first_order());
    for (auto _ : state) benchmark::DoNotOptimize(worst_case_delta(cl).value);
}
BENCHMARK(BM_WorstCaseDelta)->Unit(benchmark::kMillisecond);

void BM_YorkeSamples(benchmark::State& state) {
    PolyCertificate c;
    c.variables = {"x", "y", "xk"};
    c.V1 = Polynomial::quadratic_form(Matrix::Identity(3, 3));
    c.V2 = Polynomial(3);
    const VectorField f = closed_loop_field(NonlinearModel::brunton2(), first_order());
    for (auto _ : state)
        benchmark::DoNotOptimize(yorke_sample_check(c, f, static_cast<std::size_t>(state.range(0)), 1).violations);
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_YorkeSamples)->Arg(4096)->Arg(65536)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
