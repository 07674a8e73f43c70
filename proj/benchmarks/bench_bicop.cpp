#include <benchmark/benchmark.h>

#include "vinestress/bicop.hpp"
#include "vinestress/marginals.hpp"
#include "vinestress/rng.hpp"

using namespace vinestress;

namespace {

const Family kFamilies[] = {Family::Gaussian, Family::Clayton, Family::Gumbel, Family::Frank, Family::Joe};

BivariateCopula at_tau_half(benchmark::State& state) {
  const Family f = kFamilies[state.range(0)];
  state.SetLabel(std::string(family_name(f)));
  return {f, tau_to_parameter(f, Rotation::R0, 0.5)};
}

Column uniforms(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  Column u(n);
  for (auto& x : u) x = rng.uniform();
  return u;
}

}  // namespace

static void BM_Hfunc(benchmark::State& state) {
  const auto c = at_tau_half(state);
  const Column u = uniforms(1024, 1), v = uniforms(1024, 2);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.hfunc(Conditioning::OnSecond, u[i], v[i]));
    i = (i + 1) & 1023;
  }
}
BENCHMARK(BM_Hfunc)->DenseRange(0, 4);

static void BM_Hinv(benchmark::State& state) {
  const auto c = at_tau_half(state);
  const Column p = uniforms(1024, 3), v = uniforms(1024, 4);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.hinv(Conditioning::OnSecond, p[i], v[i]));
    i = (i + 1) & 1023;
  }
}
BENCHMARK(BM_Hinv)->DenseRange(0, 4);

static void BM_LogDensity(benchmark::State& state) {
  const auto c = at_tau_half(state);
  const Column u = uniforms(1024, 5), v = uniforms(1024, 6);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.log_density(u[i], v[i]));
    i = (i + 1) & 1023;
  }
}
BENCHMARK(BM_LogDensity)->DenseRange(0, 4);

static void BM_SelectFamily(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const BivariateCopula c(Family::Clayton, 2.0);
  const Column u = uniforms(n, 7), w = uniforms(n, 8);
  Column v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = c.hinv(Conditioning::OnFirst, w[i], u[i]);
  const auto candidates = candidate_specs();
  for (auto _ : state) benchmark::DoNotOptimize(select_family(u, v, candidates));
}
BENCHMARK(BM_SelectFamily)->Arg(250)->Arg(1000)->Unit(benchmark::kMillisecond);

static void BM_KendallTau(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Column x = uniforms(n, 9), y = uniforms(n, 10);
  for (auto _ : state) benchmark::DoNotOptimize(kendall_tau(x, y));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KendallTau)->RangeMultiplier(4)->Range(256, 16384)->Complexity(benchmark::oNLogN);
