#include <benchmark/benchmark.h>

#include <random>

#include "varsig/beta.hpp"
#include "varsig/exact.hpp"
#include "varsig/mc.hpp"
#include "varsig/perturb.hpp"

using namespace varsig;

namespace {

TimeSeries two_regime(Index n, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> z;
  std::vector<double> v(n);
  for (Index t = 0; t < n; ++t) v[t] = z(rng) * (t < n / 2 ? 1.0 : 1.6);
  return TimeSeries(std::move(v), 0.0);
}

void BM_BetaCdf(benchmark::State& state) {
  double x = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(beta_cdf(x, 10.0, 10.0));
    x = x < 0.9 ? x + 1e-4 : 0.1;
  }
}
BENCHMARK(BM_BetaCdf);

void BM_Binseg(benchmark::State& state) {
  const auto s = two_regime(static_cast<Index>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(binary_segmentation(s, StatKind::cusum_squares, FixedCount{4}));
}
BENCHMARK(BM_Binseg)->Arg(200)->Arg(2000);

void BM_Pelt(benchmark::State& state) {
  const auto s = two_regime(static_cast<Index>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(pelt(s, 3.0 * std::log(double(s.size()))));
}
BENCHMARK(BM_Pelt)->Arg(200)->Arg(2000);

void BM_ExactSelectionSet(benchmark::State& state) {
  const auto s = two_regime(static_cast<Index>(state.range(0)), 3);
  const auto run = binary_segmentation(s, StatKind::cusum_squares, FixedCount{3});
  const PhiPath path(s, Window{run.changepoints.front(), 20});
  const auto config = replay_config(run);
  for (auto _ : state) {
    benchmark::DoNotOptimize(selection_set(path, config, run.changepoints, Conditioning::tau_in_model));
  }
}
BENCHMARK(BM_ExactSelectionSet)->Arg(200)->Arg(2000);

void BM_GpDirect(benchmark::State& state) {
  const auto s = two_regime(200, 4);
  const auto run = binary_segmentation(s, StatKind::likelihood_ratio, FixedCount{1});
  const PhiPath path(s, Window{run.changepoints.front(), 20});
  SamplerConfig sc;
  sc.n = state.range(0);
  for (auto _ : state) benchmark::DoNotOptimize(mc_p_value(path, run, Conditioning::tau_in_model, sc));
}
BENCHMARK(BM_GpDirect)->Arg(50)->Arg(200);

void BM_GpMean(benchmark::State& state) {
  const auto x = stratified_phis(state.range(0), PhiDistribution::uniform01, 10, 5);
  std::vector<char> y(x.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] > 0.3 && x[i] < 0.8;
  const auto gp = fit_gp(x, y, 100.0);
  double phi = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gp.mean(phi));
    phi = phi < 1.0 ? phi + 1e-3 : 0.0;
  }
}
BENCHMARK(BM_GpMean)->Arg(100)->Arg(10000);

}  // namespace

BENCHMARK_MAIN();
