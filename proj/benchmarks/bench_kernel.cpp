// Microbenchmarks for the hot paths: closed-form kernel sums, the radial
// reduction, the low-level quadrature engines, and the trace series.
// Run with  ./build/benchmarks/bench_kernel --benchmark_min_time=0.1
// for a quick pass.

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "hg/kernel.hpp"
#include "hg/measure.hpp"
#include "hg/quadrature.hpp"
#include "hg/trace.hpp"

namespace {

hg::Measure dirac_comb(int atoms) {
  hg::DiracComb comb;
  std::mt19937_64 eng(7);
  for (int i = 0; i < atoms; ++i) {
    double x = static_cast<double>(eng() >> 11) * 0x1.0p-53 * 20.0 - 10.0;
    comb.atoms.push_back({{x}, 1.0});
  }
  return hg::Measure{1, comb};
}

void BM_EvaluateDiracComb(benchmark::State& state) {
  const hg::Measure mu = dirac_comb(static_cast<int>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(hg::evaluate(mu, {0.25}, 0.5).value);
}
BENCHMARK(BM_EvaluateDiracComb)->Arg(16)->Arg(256);

void BM_EvaluateExpQuadClosed(benchmark::State& state) {
  hg::ExpQuadDensity d;
  d.A = 0.25;
  hg::Measure mu{1, d};
  for (auto _ : state)
    benchmark::DoNotOptimize(hg::evaluate(mu, {1.0}, 0.5).value);
}
BENCHMARK(BM_EvaluateExpQuadClosed);

void BM_EvaluateRadialModifier(benchmark::State& state) {
  hg::ExpQuadDensity d;
  d.A = 0.25;
  d.modifier = hg::ModExpDecay{1.0};
  hg::Measure mu{static_cast<int>(state.range(0)), d};
  hg::Point x(static_cast<std::size_t>(state.range(0)), 0.5);
  for (auto _ : state)
    benchmark::DoNotOptimize(hg::evaluate(mu, x, 0.25).value);
}
BENCHMARK(BM_EvaluateRadialModifier)->Arg(1)->Arg(2)->Arg(3);

void BM_EvaluateGrid(benchmark::State& state) {
  const int cells = static_cast<int>(state.range(0));
  hg::GridDensity g;
  g.support_radius = 2.0;
  g.cells_per_axis = cells;
  g.samples.assign(static_cast<std::size_t>(cells) * cells, 1.0);
  hg::Measure mu{2, g};
  for (auto _ : state)
    benchmark::DoNotOptimize(hg::evaluate(mu, {0.1, -0.2}, 0.3).value);
}
BENCHMARK(BM_EvaluateGrid)->Arg(16)->Arg(64);

void BM_MepsExpDecay(benchmark::State& state) {
  hg::ExpQuadDensity d;
  d.modifier = hg::ModExpDecay{1.0};
  hg::Measure mu{2, d};
  for (auto _ : state)
    benchmark::DoNotOptimize(hg::meps_norm(mu, 0.5));
}
BENCHMARK(BM_MepsExpDecay);

void BM_GkGaussian(benchmark::State& state) {
  auto f = [](double s) { return std::exp(-s * s); };
  for (auto _ : state) {
    auto r = hg::quad::gk_adaptive(f, -8.0, 8.0, 1e-10, 1e-14, 4096);
    benchmark::DoNotOptimize(r.value);
  }
}
BENCHMARK(BM_GkGaussian);

void BM_BesselI0e(benchmark::State& state) {
  double kappa = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(hg::quad::i0e(kappa));
    kappa += 0.37;
    if (kappa > 40.0) kappa = 0.0;
  }
}
BENCHMARK(BM_BesselI0e);

void BM_TraceSeries(benchmark::State& state) {
  std::vector<double> ones(40, 1.0);
  hg::TraceSeries s = hg::build_trace_solution(ones, 2.0, 2.0, 1.5, 80);
  for (auto _ : state)
    benchmark::DoNotOptimize(hg::eval_trace_solution(s, 1.5, 0.5).value);
}
BENCHMARK(BM_TraceSeries);

}  // namespace

BENCHMARK_MAIN();
