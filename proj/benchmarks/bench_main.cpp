#include <benchmark/benchmark.h>

#include <vector>

#include "cfsv/charfn.hpp"
#include "cfsv/drift_factor.hpp"
#include "cfsv/fourier_pricer.hpp"
#include "cfsv/mc_engine.hpp"

namespace {

using namespace cfsv;

void BM_RiccatiSolve(benchmark::State& state) {
  const auto p = presets::baseline();
  const RiccatiSchedule schedule(1.0, 1.0, p, default_ode_steps(1.0));
  double theta = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(schedule.solve(cplx{theta, 0.0}));
    theta = theta > 100 ? 0.5 : theta + 1.0;
  }
}
BENCHMARK(BM_RiccatiSolve);

void BM_FourierSlice(benchmark::State& state) {
  const auto p = presets::baseline();
  const double t_e = static_cast<double>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(FourierSlice(t_e, t_e, p));
}
BENCHMARK(BM_FourierSlice)->Arg(1)->Arg(5)->Unit(benchmark::kMillisecond);

void BM_SliceStrike(benchmark::State& state) {
  const FourierSlice slice(1.0, 1.0, presets::baseline());
  double K = 0.5;
  for (auto _ : state) {
    benchmark::DoNotOptimize(slice.call(1.0, K, 1.0));
    K = K > 2.0 ? 0.5 : K + 0.01;
  }
}
BENCHMARK(BM_SliceStrike);

void BM_DriftFactorNumeric(benchmark::State& state) {
  const auto p = presets::drift_study(1.0);
  for (auto _ : state) benchmark::DoNotOptimize(k_sq_numeric(1.0, 2.0, p));
}
BENCHMARK(BM_DriftFactorNumeric)->Unit(benchmark::kMicrosecond);

void BM_DriftFactorClosedForm(benchmark::State& state) {
  ModelParams p = presets::baseline();
  for (auto _ : state) benchmark::DoNotOptimize(k_sq_closed_form(1.0, 2.0, p));
}
BENCHMARK(BM_DriftFactorClosedForm);

void BM_EvolveStep(benchmark::State& state) {
  const auto p = presets::drift_study(1.0);
  const std::vector<double> tracked{2.0};
  SimulationContext ctx(p, MarketCurves::flat(1.0), TimeGrid::uniform(1.0, 100), tracked);
  PathState s = ctx.initial_state();
  const std::array<double, 3> z{0.3, -0.2, 0.1};
  std::size_t n = 0;
  for (auto _ : state) {
    evolve_step(s, ctx.step(n), z, p);
    if (++n == 100) {
      n = 0;
      s = ctx.initial_state();
    }
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_EvolveStep);

void BM_VanillaMonteCarlo(benchmark::State& state) {
  McConfig cfg;
  cfg.n_paths = static_cast<std::size_t>(state.range(0));
  cfg.n_steps = 100;
  cfg.exact_settlements = {1.0};
  cfg.threads = 1;
  const auto payoff = PayoffSpec::vanilla(1.0, 1.0);
  for (auto _ : state)
    benchmark::DoNotOptimize(price_payoff(payoff, cfg, MarketCurves::flat(1.0), presets::baseline()));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_VanillaMonteCarlo)->Arg(10'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
