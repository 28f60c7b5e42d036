#include "driftlab/flow.hpp"
#include "driftlab/oracle.hpp"
#include "driftlab/spectral.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace driftlab;

void BM_CircleEigenpairs(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(0));
    const auto dm = discretize(round_circle_family(1.0, 0.0).evaluate(0.0), Resolution{n, 16});
    const QuadraticForms forms = assemble_forms(dm);
    for (auto _ : state) benchmark::DoNotOptimize(lowest_eigenpairs(forms, 6));
}
BENCHMARK(BM_CircleEigenpairs)->Arg(64)->Arg(256)->Arg(1024)->Unit(benchmark::kMillisecond);

void BM_ProductEigenpairs(benchmark::State& state)
{
    const auto fam = product_family({scaled_gaussian_family(2.0, 1, 0.0), round_circle_family(1.0, 0.0)});
    const auto dm = discretize(fam.evaluate(0.0), Resolution{64, 16});
    const QuadraticForms forms = assemble_forms(dm);
    for (auto _ : state) benchmark::DoNotOptimize(lowest_eigenpairs(forms, 6));
}
BENCHMARK(BM_ProductEigenpairs)->Unit(benchmark::kMillisecond);

void BM_DenseOracle(benchmark::State& state)
{
    const auto dm = discretize(round_circle_family(1.0, 0.0).evaluate(0.0), Resolution{64, 16});
    const QuadraticForms forms = assemble_forms(dm);
    for (auto _ : state) benchmark::DoNotOptimize(dense_spectrum(forms));
}
BENCHMARK(BM_DenseOracle)->Unit(benchmark::kMillisecond);

void BM_FlowStep(benchmark::State& state)
{
    ContinuumState s;
    s.factors.push_back(CircleFactor{TrigPolynomial::from_coefficients({1.0, 0.1, 0.02}, {0.0, 0.05}),
                                     TrigPolynomial::from_coefficients({0.0, 0.2}, {0.0, -0.1})});
    FlowConfig cfg;
    cfg.mode_cutoff = static_cast<int>(state.range(0));
    const FlowState st = make_flow_state(s, cfg);
    for (auto _ : state) benchmark::DoNotOptimize(step_modified_flow(st, 1e-3, cfg));
}
BENCHMARK(BM_FlowStep)->Arg(16)->Arg(32)->Arg(64)->Unit(benchmark::kMicrosecond);

void BM_SharpRun(benchmark::State& state)
{
    ScenarioSpec spec;
    spec.family = scaled_gaussian_family(2.0, 1, 0.0);
    spec.horizon = 0.5;
    spec.output_interval = 0.1;
    for (auto _ : state) benchmark::DoNotOptimize(run_flow(spec));
}
BENCHMARK(BM_SharpRun)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
