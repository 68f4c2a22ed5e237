#include <benchmark/benchmark.h>

#include "strathjb/config.hpp"
#include "strathjb/dynamics.hpp"
#include "strathjb/hamiltonians.hpp"
#include "strathjb/solver.hpp"

using namespace strathjb;

namespace {

solver::StratifiedProblem cross() {
  return config::build_problem(config::builtin_problem("cross"));
}

void BM_SolveCrossCoarse(benchmark::State& state) {
  const auto prob = cross();
  for (auto _ : state) {
    auto grid = solver::solve_value(prob, 0.1, 0.05);
    benchmark::DoNotOptimize(grid.at(grid.slices() - 1, 0));
  }
}
BENCHMARK(BM_SolveCrossCoarse)->Unit(benchmark::kMillisecond);

void BM_TangentialHamiltonianOrigin(benchmark::State& state) {
  const auto prob = cross();
  const geometry::Stratum* origin = nullptr;
  for (const auto& s : prob.strat.strata())
    if (s.dim == 0) origin = &s;
  const auto gs =
      dynamics::evaluate(prob.map, prob.strat, origin->basepoint, 0.0);
  const Vec p{0.3, -0.2};
  for (auto _ : state) {
    auto hv = hamiltonians::hamiltonian_tangential(gs, *origin, p);
    benchmark::DoNotOptimize(hv.value);
  }
}
BENCHMARK(BM_TangentialHamiltonianOrigin);

void BM_EvaluateAtInterface(benchmark::State& state) {
  const auto prob = cross();
  const Vec x{0.5, 0.0};
  const auto& s = prob.strat.locate(x);
  for (auto _ : state) {
    auto gs = dynamics::evaluate_at(prob.map, prob.strat, s, x, 0.0);
    benchmark::DoNotOptimize(gs.size());
  }
}
BENCHMARK(BM_EvaluateAtInterface);

void BM_Interpolate(benchmark::State& state) {
  const auto prob = cross();
  const auto grid = solver::solve_value(prob, 0.1, 0.05);
  const Vec x{0.137, -0.482};
  for (auto _ : state) {
    benchmark::DoNotOptimize(grid.interpolate(grid.slices() - 1, x));
  }
}
BENCHMARK(BM_Interpolate);

void BM_OneStep(benchmark::State& state) {
  const auto prob = cross();
  const auto grid = solver::solve_value(prob, 0.1, 0.05);
  const auto gs = dynamics::evaluate(prob.map, prob.strat, {0.5, 0.5}, 0.0);
  std::size_t pick = 0;
  bool clamped = false;
  for (auto _ : state) {
    benchmark::DoNotOptimize(solver::one_step_cost(
        grid, 0, {0.5, 0.5}, gs, grid.dt(), &pick, &clamped));
  }
}
BENCHMARK(BM_OneStep);

}  // namespace

BENCHMARK_MAIN();
