#include <benchmark/benchmark.h>

#include <vector>

#include "potx/betting.hpp"
#include "potx/estimate.hpp"
#include "potx/ingest.hpp"
#include "potx/potmodel.hpp"
#include "potx/reduce.hpp"
#include "potx/rng.hpp"

namespace {

const potx::UnivariateTarget& synthetic_target() {
  static const potx::UnivariateTarget target = [] {
    potx::SynthSpec spec;
    spec.n_runs = 1;
    return potx::reduce_target(potx::generate_synthetic(spec),
                               potx::TargetSpec::canonical(potx::TargetId::T1));
  }();
  return target;
}

void BM_BettingUpdate(benchmark::State& state) {
  potx::Rng rng(1);
  std::vector<double> diffs(1024);
  for (auto& d : diffs) d = 2.0 * rng.uniform() - 1.0;
  for (auto _ : state) {
    potx::BettingState game(1.0);
    for (double d : diffs) game.update(d);
    benchmark::DoNotOptimize(game.wealth());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long>(diffs.size()));
}
BENCHMARK(BM_BettingUpdate);

void BM_OrderStatisticGame(benchmark::State& state) {
  const auto observed = potx::sample_model(potx::fit_pot_model(synthetic_target(), 0.99).model,
                                           600, 2);
  const auto simulated = potx::sample_model(potx::fit_pot_model(synthetic_target(), 0.99).model,
                                            600, 3);
  potx::GameConfig cfg;
  cfg.K = static_cast<int>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(potx::play_order_statistic_game(observed, simulated, cfg));
  }
}
BENCHMARK(BM_OrderStatisticGame)->Arg(3)->Arg(25);

void BM_FitPotModel(benchmark::State& state) {
  const double level = static_cast<double>(state.range(0)) / 10000.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(potx::fit_pot_model(synthetic_target(), level));
  }
}
BENCHMARK(BM_FitPotModel)->Arg(9000)->Arg(9900)->Unit(benchmark::kMillisecond);

void BM_SampleModel(benchmark::State& state) {
  const auto model = potx::fit_pot_model(synthetic_target(), 0.99).model;
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(potx::sample_model(model, n, 4));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleModel)->Arg(1 << 16);

void BM_EstimateFrequency(benchmark::State& state) {
  const auto model = potx::fit_pot_model(synthetic_target(), 0.99).model;
  auto spec = potx::TargetSpec::canonical(potx::TargetId::T1);
  spec.event_threshold = 16.4;
  potx::EstimateConfig cfg;
  cfg.replications = 200;
  for (auto _ : state) benchmark::DoNotOptimize(potx::estimate_frequency(model, spec, 0, cfg));
}
BENCHMARK(BM_EstimateFrequency)->Unit(benchmark::kMillisecond);

void BM_PoissonInterval(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(potx::poisson_interval(12.0, 0.92));
}
BENCHMARK(BM_PoissonInterval);

}  // namespace
BENCHMARK_MAIN();
