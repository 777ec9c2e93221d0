#include <benchmark/benchmark.h>

#include "iffl/equilibrium.hpp"
#include "iffl/integrate.hpp"
#include "iffl/sweep.hpp"

namespace {

iffl::ModelParams autocat_params(double lambda) {
  iffl::ModelParams p;
  p.a = 0.8;
  p.b = 1.0;
  p.c = 0.1;
  p.delta = 1.0;
  p.kappa = 20.0;
  p.V = 1.95;
  p.K = 1.0;
  p.n = 2.0;
  p.lambda = lambda;
  return p;
}

void BM_ReducedIntegrate(benchmark::State& state) {
  iffl::ModelParams p;
  p.kappa = 2.0;
  p.lambda = 1.0;
  iffl::IntegratorConfig cfg;
  cfg.t_end = 50.0;
  cfg.steady_window = 0.0;  // fixed work per iteration, no early exit
  for (auto _ : state) {
    const auto traj =
        iffl::integrate(p, iffl::ReducedState{2.0, 2.0}, std::nullopt, cfg);
    benchmark::DoNotOptimize(traj.y.back());
  }
}
BENCHMARK(BM_ReducedIntegrate);

void BM_FullClosedIntegrate(benchmark::State& state) {
  const auto p = autocat_params(25.0);
  iffl::IntegratorConfig cfg;
  cfg.t_end = 50.0;
  cfg.steady_window = 0.0;
  for (auto _ : state) {
    const auto traj =
        iffl::integrate(p, iffl::FullState{1.0, 1.0, 0.0}, std::nullopt, cfg);
    benchmark::DoNotOptimize(traj.y.back());
  }
}
BENCHMARK(BM_FullClosedIntegrate);

void BM_EquilibriumScan(benchmark::State& state) {
  const auto p = autocat_params(25.0);
  for (auto _ : state) {
    const auto reports = iffl::equilibria_autocat(p);
    benchmark::DoNotOptimize(reports.size());
  }
}
BENCHMARK(BM_EquilibriumScan);

void BM_AlgebraicLambdaSweep(benchmark::State& state) {
  const auto p = autocat_params(0.0);
  iffl::SweepSpec spec;
  spec.axis1 = {"lambda", 1.0, 30.0, 64};
  spec.method = iffl::SweepMethod::Algebraic;
  spec.threads = 1;
  for (auto _ : state) {
    const auto result = iffl::lambda_sweep(p, spec);
    benchmark::DoNotOptimize(result.points.size());
  }
}
BENCHMARK(BM_AlgebraicLambdaSweep);

}  // namespace

BENCHMARK_MAIN();
