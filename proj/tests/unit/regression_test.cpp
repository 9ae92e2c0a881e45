#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <tariffopt/error.hpp>
#include <tariffopt/regression.hpp>

using namespace tariffopt;
using regression::DesignMatrix;

namespace {

DesignMatrix random_design(int n, int k, std::uint64_t seed, Eigen::VectorXd* truth = nullptr, double noise = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  DesignMatrix dm;
  dm.X.resize(n, k);
  for (int i = 0; i < n; ++i) {
    dm.X(i, 0) = 1.0;
    for (int j = 1; j < k; ++j) dm.X(i, j) = z(rng);
  }
  Eigen::VectorXd b(k);
  for (int j = 0; j < k; ++j) b[j] = 0.5 * (j + 1) * (j % 2 ? -1 : 1);
  dm.y = dm.X * b;
  for (int i = 0; i < n; ++i) dm.y[i] += noise * z(rng);
  for (int j = 0; j < k; ++j) dm.column_names.push_back("c" + std::to_string(j));
  dm.price_index = 1;
  if (truth) *truth = b;
  return dm;
}

data::SplitSpec two_year_split() {
  return {{make_date(2015, 1, 1), make_date(2015, 12, 31)},
          {make_date(2016, 1, 1), make_date(2016, 3, 31)},
          {make_date(2016, 4, 1), make_date(2016, 6, 30)}};
}

const data::MeterSeries& synthetic_series() {
  static const data::MeterSeries s = [] {
    auto cfg = data::SynthConfig::defaults();
    cfg.start = make_date(2014, 12, 1);
    cfg.days = 578;
    return data::synthesize(cfg, 21);
  }();
  return s;
}

}  // namespace

TEST(Ols, MatchesNormalEquations) {
  const auto dm = random_design(400, 6, 1);
  const auto fit = regression::fit_ols(dm);
  const Eigen::MatrixXd xtx = dm.X.transpose() * dm.X;
  const Eigen::VectorXd oracle = xtx.ldlt().solve(dm.X.transpose() * dm.y);
  EXPECT_LT((fit.beta - oracle).lpNorm<Eigen::Infinity>(), 1e-10);

  const Eigen::MatrixXd inv = xtx.inverse();
  const double s2 = (dm.y - dm.X * oracle).squaredNorm() / (400 - 6);
  EXPECT_NEAR(fit.sigma2_eps, s2, 1e-12);
  for (int j = 0; j < 6; ++j) EXPECT_NEAR(fit.standard_errors[j], std::sqrt(s2 * inv(j, j)), 1e-10);
}

TEST(Ols, ResidualsOrthogonalToColumns) {
  const auto dm = random_design(300, 5, 2);
  const auto fit = regression::fit_ols(dm);
  const Eigen::VectorXd g = dm.X.transpose() * fit.residuals;
  EXPECT_LT(g.lpNorm<Eigen::Infinity>(), 1e-9 * dm.y.norm());
  EXPECT_NEAR(fit.residuals.sum(), 0.0, 1e-9);
  EXPECT_GT(fit.r2_train, 0.0);
  EXPECT_LE(fit.r2_train, 1.0);
}

TEST(Ols, ExactOnNoiselessData) {
  Eigen::VectorXd truth;
  const auto dm = random_design(50, 4, 3, &truth, 0.0);
  const auto fit = regression::fit_ols(dm);
  EXPECT_LT((fit.beta - truth).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_NEAR(fit.r2_train, 1.0, 1e-12);
}

TEST(Ols, ColumnScalingRescalesCoefficient) {
  auto dm = random_design(200, 4, 4);
  const auto a = regression::fit_ols(dm);
  dm.X.col(2) *= 10.0;
  const auto b = regression::fit_ols(dm);
  EXPECT_NEAR(b.beta[2], a.beta[2] / 10.0, 1e-12);
  EXPECT_NEAR(b.beta[1], a.beta[1], 1e-12);
}

TEST(Ols, RejectsCollinearAndShortDesigns) {
  auto dm = random_design(100, 4, 5);
  dm.X.col(3) = 2.0 * dm.X.col(2);
  try {
    regression::fit_ols(dm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::RankDeficient);
    EXPECT_NE(std::string(e.what()).find("c3"), std::string::npos);
  }
  const auto small = random_design(4, 4, 6);
  EXPECT_THROW(regression::fit_ols(small), Error);
}

TEST(ErrorStats, HandComputed) {
  Eigen::VectorXd y(4), p(4);
  y << 1, 2, 3, 4;
  p << 1, 3, 3, 2;
  const auto s = regression::error_stats(y, p);
  EXPECT_DOUBLE_EQ(s.mae, 0.75);
  EXPECT_DOUBLE_EQ(s.rmse, std::sqrt(5.0 / 4.0));
  EXPECT_DOUBLE_EQ(s.r2, 1.0 - 5.0 / 5.0);
}

TEST(Spline, ReproducesCubic) {
  std::vector<double> t, v;
  for (int i = 0; i <= 200; ++i) {
    const double x = i * 0.5;
    t.push_back(x);
    v.push_back(1.0 + 0.2 * x - 0.01 * x * x + 1e-4 * x * x * x);
  }
  const auto s = regression::SplineTrend::fit(t, v, 6);
  for (std::size_t i = 0; i < t.size(); i += 17) EXPECT_NEAR(s(t[i]), v[i], 1e-8);
}

TEST(Spline, ClampsOutsideSpan) {
  std::vector<double> t, v;
  for (int i = 0; i < 100; ++i) {
    t.push_back(i);
    v.push_back(0.01 * i * i);
  }
  const auto s = regression::SplineTrend::fit(t, v, 4);
  const double far = s(1e4);
  EXPECT_LE(far, s.clamp_high());
  EXPECT_GE(s(-1e4), s.clamp_low());
  EXPECT_NEAR(s.clamp_high() - s.clamp_low(), 1.4 * 0.01 * 99 * 99, 1e-6);
}

TEST(Spline, DegenerateKnots) {
  const std::vector<double> t{0, 1, 2}, v{0, 1, 2};
  try {
    regression::SplineTrend::fit(t, v, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateKnots);
  }
}

TEST(Features, RowCountIsSeriesMinusHistory) {
  const auto& series = synthetic_series();
  for (auto kind : {regression::ModelKind::Small, regression::ModelKind::Large}) {
    const auto split = regression::build_features(series, regression::FeatureSpec::for_kind(kind), two_year_split());
    const auto dm = regression::apply_transform(series, split.transform);
    EXPECT_EQ(regression::FeatureSpec::for_kind(kind).required_history(), 336);
    EXPECT_EQ(dm.rows(), static_cast<Eigen::Index>(series.size()) - 336);
    EXPECT_EQ(dm.cols(), static_cast<Eigen::Index>(split.transform.column_names.size()));
    EXPECT_EQ(dm.row_times.front(), series[336].timestamp);
  }
}

TEST(Features, LagsLookBack) {
  const auto& series = synthetic_series();
  const regression::RawFeature lag{regression::RawFeature::Kind::DemandLag, 48};
  EXPECT_DOUBLE_EQ(regression::evaluate(lag, series.records(), 500), series[452].demand);
  const regression::RawFeature mean{regression::RawFeature::Kind::DemandMean24h, 0};
  double m = 0.0;
  for (std::size_t t = 500 - 95; t <= 500 - 48; ++t) m += series[t].demand;
  EXPECT_NEAR(regression::evaluate(mean, series.records(), 500), m / 48.0, 1e-9);
  EXPECT_EQ(regression::RawFeature::parse(lag.name()), lag);
}

TEST(Features, SplitsHaveNoLeakage) {
  const auto& series = synthetic_series();
  const auto split = regression::build_features(series, regression::FeatureSpec::large(), two_year_split());
  for (const auto& t : split.train.row_times) ASSERT_TRUE(two_year_split().train.contains(t));
  for (const auto& t : split.test.row_times) ASSERT_TRUE(two_year_split().test.contains(t));
  ASSERT_GT(split.train.rows(), 0);
  ASSERT_GT(split.test.rows(), 0);
  ASSERT_GE(split.train.price_index, 0);
  EXPECT_EQ(split.train.column_names[static_cast<std::size_t>(split.train.price_index)], "price");
  const auto groups = regression::feature_groups(split.train);
  EXPECT_NE(std::find(groups.begin(), groups.end(), "month"), groups.end());
}

TEST(Fit, RecoversPlantedPriceCoefficient) {
  const auto& series = synthetic_series();
  const auto split = regression::build_features(series, regression::FeatureSpec::large(), two_year_split());
  const auto fit = regression::fit_ols(split.train);
  EXPECT_NEAR(fit.price_coefficient(), -0.36, 5.0 * fit.standard_errors[fit.price_index]);
  const auto m = regression::evaluate(fit, split.test);
  EXPECT_LT(m.rmse_test, 2.0);
  const Eigen::VectorXd base = fit.baseline(split.test);
  const Eigen::VectorXd pred = fit.predict(split.test);
  const Eigen::VectorXd price_part = fit.price_coefficient() * split.test.X.col(fit.price_index);
  EXPECT_LT((pred - base - price_part).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Fit, CombinedHasOneEquationPerSlot) {
  const auto& series = synthetic_series();
  const auto split = regression::build_features(series, regression::FeatureSpec::combined(), two_year_split());
  const auto cf = regression::fit_combined(split.train);
  const auto pred = cf.predict(split.test);
  ASSERT_EQ(pred.size(), split.test.rows());
  for (Eigen::Index i = 0; i < 96; ++i) {
    const auto& f = cf.slots[static_cast<std::size_t>(split.test.row_times[static_cast<std::size_t>(i)].slot_of_day())];
    EXPECT_NEAR(pred[i], split.test.X.row(i).dot(f.beta), 1e-9);
  }
}

TEST(Fit, PriceAblationDoesNotImproveTrainingFit) {
  const auto r = regression::ablate_price(synthetic_series(), regression::FeatureSpec::small(), two_year_split());
  EXPECT_GE(r.delta_rmse_train(), -1e-12);
}
