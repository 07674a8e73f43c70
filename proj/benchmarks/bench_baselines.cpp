#include <benchmark/benchmark.h>

#include "vinestress/baselines.hpp"
#include "vinestress/numeric.hpp"
#include "vinestress/rng.hpp"

using namespace vinestress;

namespace {

struct Data {
  Eigen::MatrixXd X;
  Column y;
};

// Heteroscedastic linear model, spread growing with the first regressor.
Data heteroscedastic(std::size_t n, Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Data out{Eigen::MatrixXd(static_cast<Eigen::Index>(n), d), Column(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    double mean = 1.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      out.X(row, k) = rng.uniform();
      mean += 0.5 * out.X(row, k);
    }
    out.y[i] = mean + (0.2 + out.X(row, 0)) * rng.normal();
  }
  return out;
}

}  // namespace

static void BM_LinearQuantile(benchmark::State& state) {
  const auto data = heteroscedastic(static_cast<std::size_t>(state.range(0)), state.range(1), 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_linear_quantile(data.X, data.y, 0.9));
}
BENCHMARK(BM_LinearQuantile)->Args({250, 1})->Args({1000, 1})->Args({1000, 3})->Unit(benchmark::kMillisecond);

static void BM_Expectile(benchmark::State& state) {
  const auto data = heteroscedastic(static_cast<std::size_t>(state.range(0)), state.range(1), 2);
  for (auto _ : state) benchmark::DoNotOptimize(fit_expectile(data.X, data.y, 0.9));
}
BENCHMARK(BM_Expectile)->Args({1000, 1})->Args({1000, 3})->Unit(benchmark::kMillisecond);

static void BM_Ols(benchmark::State& state) {
  const auto data = heteroscedastic(static_cast<std::size_t>(state.range(0)), 3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(fit_ols(data.X, data.y));
}
BENCHMARK(BM_Ols)->Arg(1000);
