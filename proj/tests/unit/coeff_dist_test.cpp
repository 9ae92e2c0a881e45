#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include <tariffopt/coeff_dist.hpp>
#include <tariffopt/error.hpp>

using namespace tariffopt;

namespace {

regression::DesignMatrix design(int n, std::uint64_t seed, bool intercept = true) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  regression::DesignMatrix dm;
  dm.X.resize(n, 3);
  dm.y.resize(n);
  for (int i = 0; i < n; ++i) {
    dm.X(i, 0) = intercept ? 1.0 : z(rng);
    dm.X(i, 1) = 10.0 + 3.0 * z(rng);
    dm.X(i, 2) = z(rng);
    dm.y[i] = 50.0 - 0.4 * dm.X(i, 1) + 2.0 * dm.X(i, 2) + z(rng);
  }
  dm.column_names = {"intercept", "price", "x"};
  dm.price_index = 1;
  return dm;
}

}  // namespace

TEST(Beta1, StdMatchesExplicitInverse) {
  const auto dm = design(500, 1);
  const auto fit = regression::fit_ols(dm);
  const auto d = coeff::beta1_distribution(fit, dm);
  const Eigen::MatrixXd inv = (dm.X.transpose() * dm.X).inverse();
  EXPECT_DOUBLE_EQ(d.mean, fit.beta[1]);
  EXPECT_NEAR(d.std, std::sqrt(fit.sigma2_eps * inv(1, 1)), 1e-12);
  EXPECT_NEAR(d.std, fit.standard_errors[1], 1e-12);
}

TEST(Beta1, WeightsReproduceCoefficient) {
  const auto dm = design(300, 2);
  const auto fit = regression::fit_ols(dm);
  const auto w = coeff::price_weights(dm);
  EXPECT_NEAR(w.dot(dm.y), fit.beta[1], 1e-10);
  // The weights annihilate every other column and pick out the price column.
  EXPECT_NEAR(w.dot(dm.X.col(0)), 0.0, 1e-10);
  EXPECT_NEAR(w.dot(dm.X.col(1)), 1.0, 1e-10);
  EXPECT_NEAR(w.dot(dm.X.col(2)), 0.0, 1e-10);
}

TEST(Beta1, RejectsInterceptFreeAndMismatchedDesigns) {
  const auto dm = design(200, 3, false);
  const auto fit = regression::fit_ols(dm);
  try {
    coeff::beta1_distribution(fit, dm);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
  auto other = design(200, 3);
  other.column_names[2] = "y";
  const auto fit2 = regression::fit_ols(design(200, 3));
  try {
    coeff::beta1_distribution(fit2, other);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SchemaMismatch);
  }
}

TEST(Beta1, CoverageOverReplications) {
  int covered = 0;
  const int reps = 300;
  for (int r = 0; r < reps; ++r) {
    const auto dm = design(120, 100 + r);
    const auto d = coeff::beta1_distribution(regression::fit_ols(dm), dm);
    if (std::abs(d.mean + 0.4) <= 1.959964 * d.std) ++covered;
  }
  EXPECT_NEAR(covered / static_cast<double>(reps), 0.95, 0.04);
}

TEST(SampleBeta, MomentsAndDeterminism) {
  const coeff::PriceCoeffDistribution d{-2.0, 0.5, 0.0, false};
  const auto a = coeff::sample_beta(d, 50000, 9);
  EXPECT_EQ(a, coeff::sample_beta(d, 50000, 9));
  const double mean = std::accumulate(a.begin(), a.end(), 0.0) / a.size();
  double var = 0.0;
  for (double v : a) var += (v - mean) * (v - mean);
  var /= a.size() - 1;
  EXPECT_NEAR(mean, -2.0, 4.0 * 0.5 / std::sqrt(50000.0));
  EXPECT_NEAR(std::sqrt(var), 0.5, 0.01);
}

TEST(SampleBeta, ShiftMovesEveryDraw) {
  const coeff::PriceCoeffDistribution d{-1.0, 0.3, 0.0, false};
  const auto a = coeff::sample_beta(d, 1000, 4);
  const auto b = coeff::sample_beta(d.with_shift(2.5), 1000, 4);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(b[i], a[i] - 2.5, 1e-12);
  EXPECT_THROW(d.with_shift(-1.0), Error);
}

TEST(SampleBeta, TruncationKeepsDrawsNegative) {
  const coeff::PriceCoeffDistribution d{-0.1, 0.3, 0.0, true};
  const auto a = coeff::sample_beta(d, 20000, 5);
  EXPECT_TRUE(std::all_of(a.begin(), a.end(), [](double v) { return v < 0.0; }));
}

TEST(Clt, OrthonormalDesignPasses) {
  const int n = 2000;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::MatrixXd M(n, 3);
  for (int i = 0; i < n; ++i) M.row(i) << 1.0, z(rng), z(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  regression::DesignMatrix dm;
  dm.X = qr.householderQ() * Eigen::MatrixXd::Identity(n, 3);
  dm.y = Eigen::VectorXd::Zero(n);
  dm.column_names = {"a", "price", "b"};
  dm.price_index = 1;
  coeff::CltOptions opt;
  opt.sampling = coeff::RowSampling::Prefix;
  const auto d = coeff::clt_diagnostic(dm, {n}, 1, opt);
  EXPECT_TRUE(d.pass);
  // Eigenvalues of X'X / n.
  EXPECT_NEAR(d.max_eigenvalues[0], 1.0 / n, 1e-12);
  EXPECT_NEAR(d.min_eigenvalues[0], 1.0 / n, 1e-12);
}

TEST(Clt, FlagsDominantRow) {
  auto dm = design(400, 7);
  dm.X(0, 1) = 1e4;
  const auto d = coeff::clt_diagnostic(dm, {400}, 1, {0.05, 1e-8, coeff::RowSampling::Prefix});
  EXPECT_FALSE(d.pass);
  EXPECT_GT(d.noether_ratio, 0.05);
}
