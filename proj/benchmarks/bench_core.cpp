#include <benchmark/benchmark.h>

#include <random>

#include <tariffopt/data.hpp>
#include <tariffopt/optimizer.hpp>
#include <tariffopt/regression.hpp>
#include <tariffopt/scenarios.hpp>

#include "fixtures.hpp"

using namespace tariffopt;

static void BM_SolveStochastic(benchmark::State& state) {
  const int days = static_cast<int>(state.range(0));
  const auto count = static_cast<std::size_t>(state.range(1));
  const auto set = fixtures::synthetic_set(days, count, 1);
  auto spec = fixtures::synthetic_spec(days);
  spec.chi = 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(optimizer::solve_stochastic(spec, set).objective);
  state.SetLabel(std::to_string(days * kSlotsPerDay) + " slots");
}
BENCHMARK(BM_SolveStochastic)->Args({1, 20})->Args({7, 20})->Args({7, 100})->Unit(benchmark::kMillisecond);

static void BM_SolveFree(benchmark::State& state) {
  const auto set = fixtures::synthetic_set(7, 20, 2);
  const auto spec = fixtures::synthetic_spec(7, optimizer::PriceRegulation::Free);
  for (auto _ : state) benchmark::DoNotOptimize(optimizer::solve_free_price(spec, set).objective);
}
BENCHMARK(BM_SolveFree)->Unit(benchmark::kMillisecond);

static void BM_MeanShift(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v(n), w(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) v[i] = (i % 4) * 25.0 + 4.0 * z(rng);
  for (auto _ : state) benchmark::DoNotOptimize(scenarios::reduce_by_objective(v, w).probabilities.size());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MeanShift)->RangeMultiplier(10)->Range(100, 100000)->Complexity()->Unit(benchmark::kMillisecond);

static void BM_Ols(benchmark::State& state) {
  const auto n = state.range(0);
  const auto k = state.range(1);
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 1.0);
  regression::DesignMatrix dm;
  dm.X.resize(n, k);
  dm.y.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    dm.X(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < k; ++j) dm.X(i, j) = z(rng);
    dm.y[i] = z(rng);
  }
  for (Eigen::Index j = 0; j < k; ++j) dm.column_names.push_back("c" + std::to_string(j));
  dm.price_index = 1;
  for (auto _ : state) benchmark::DoNotOptimize(regression::fit_ols(dm).beta[1]);
}
BENCHMARK(BM_Ols)->Args({17520, 50})->Args({17520, 140})->Unit(benchmark::kMillisecond);

static void BM_BuildFeatures(benchmark::State& state) {
  auto cfg = data::SynthConfig::defaults();
  cfg.start = make_date(2014, 12, 1);
  cfg.days = 578;
  const auto series = data::synthesize(cfg, 5);
  const data::SplitSpec split{{make_date(2015, 1, 1), make_date(2015, 12, 31)},
                              {make_date(2016, 1, 1), make_date(2016, 3, 31)},
                              {make_date(2016, 4, 1), make_date(2016, 6, 30)}};
  const auto spec = regression::FeatureSpec::for_kind(static_cast<regression::ModelKind>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(regression::build_features(series, spec, split).train.rows());
  state.SetLabel(regression::to_string(spec.model_kind));
}
BENCHMARK(BM_BuildFeatures)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_SamplePaths(benchmark::State& state) {
  scenarios::SeasonalLibraryConfig cfg;
  cfg.first = make_date(2012, 1, 1);
  cfg.last = make_date(2018, 12, 31);
  const auto lib = scenarios::synthesize_library(scenarios::PathRole::Pool, cfg, 6);
  const auto dist = scenarios::fit_date_distributions(lib, fixtures::library_split());
  const auto dates = fixtures::horizon_dates(make_date(2016, 12, 1), 7);
  for (auto _ : state) benchmark::DoNotOptimize(scenarios::sample_paths(lib, dist, dates, 1000, 7).size());
}
BENCHMARK(BM_SamplePaths)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
