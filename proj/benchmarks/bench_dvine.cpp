#include <benchmark/benchmark.h>

#include "vinestress/datagen.hpp"
#include "vinestress/dvine.hpp"
#include "vinestress/marginals.hpp"
#include "vinestress/rng.hpp"
#include "vinestress/stress.hpp"

using namespace vinestress;

namespace {

DVineModel mixed_vine() {
  return DVineModel({"y", "x1", "x2", "x3", "x4"},
                    {{BivariateCopula(Family::Clayton, 2.0), BivariateCopula(Family::Gumbel, 1.5),
                      BivariateCopula(Family::Frank, 4.0), BivariateCopula(Family::Gaussian, 0.4)},
                     {BivariateCopula(Family::Gaussian, 0.3), BivariateCopula(Family::Joe, Rotation::R180, 1.5),
                      BivariateCopula(Family::Clayton, Rotation::R90, 0.8)},
                     {BivariateCopula(Family::Gumbel, Rotation::R270, 1.3), BivariateCopula(Family::Frank, -2.0)},
                     {BivariateCopula(Family::Joe, 1.4)}});
}

const PseudoPanel& default_panel() {
  static const PseudoPanel panel = pit_transform(difference(generate_panel(default_ground_truth_spec()).panel));
  return panel;
}

}  // namespace

static void BM_ConditionalQuantile(benchmark::State& state) {
  const auto m = mixed_vine();
  Rng rng(1);
  std::vector<std::vector<double>> points(256, std::vector<double>(4));
  for (auto& p : points)
    for (auto& x : p) x = rng.uniform();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(conditional_quantile(m, 0.95, points[i]));
    i = (i + 1) & 255;
  }
}
BENCHMARK(BM_ConditionalQuantile);

static void BM_ConditionalCdf(benchmark::State& state) {
  const auto m = mixed_vine();
  Rng rng(2);
  std::vector<std::vector<double>> points(256, std::vector<double>(4));
  for (auto& p : points)
    for (auto& x : p) x = rng.uniform();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(conditional_cdf(m, 0.7, points[i]));
    i = (i + 1) & 255;
  }
}
BENCHMARK(BM_ConditionalCdf);

static void BM_Simulate(benchmark::State& state) {
  const auto m = mixed_vine();
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate(m, n, 3));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_FitDvine(benchmark::State& state) {
  const auto m = mixed_vine();
  const Columns data = simulate(m, static_cast<std::size_t>(state.range(0)), 4);
  for (auto _ : state) benchmark::DoNotOptimize(fit_dvine(m.order(), data));
}
BENCHMARK(BM_FitDvine)->Arg(500)->Unit(benchmark::kMillisecond);

static void BM_ForwardSelect(benchmark::State& state) {
  const auto& panel = default_panel();
  const std::size_t r = panel.index_of("Technology");
  std::vector<std::string> labels;
  Columns candidates;
  for (std::size_t k = 0; k < panel.labels.size(); ++k) {
    if (k == r) continue;
    labels.push_back(panel.labels[k]);
    candidates.push_back(panel.columns[k]);
  }
  for (auto _ : state) benchmark::DoNotOptimize(forward_select("Technology", panel.columns[r], labels, candidates));
}
BENCHMARK(BM_ForwardSelect)->Unit(benchmark::kMillisecond);

static void BM_RunScenario(benchmark::State& state) {
  const auto& panel = default_panel();
  StressScenario scenario;
  scenario.stressed = {"Industrials"};
  StressConfig config;
  config.threads = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_scenario(panel, scenario, config));
}
BENCHMARK(BM_RunScenario)->Arg(1)->Unit(benchmark::kMillisecond);
