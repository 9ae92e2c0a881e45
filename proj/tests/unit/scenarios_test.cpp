#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include <tariffopt/error.hpp>
#include <tariffopt/scenarios.hpp>

#include "fixtures.hpp"

using namespace tariffopt;
using namespace tariffopt::scenarios;

namespace {

PathLibrary library(PathRole role, std::uint64_t seed) {
  SeasonalLibraryConfig cfg;
  cfg.first = make_date(2012, 1, 1);
  cfg.last = make_date(2018, 12, 31);
  if (role == PathRole::Solar) cfg.hourly = false;
  return synthesize_library(role, cfg, seed);
}

std::vector<double> clustered_values(std::uint64_t seed, int n = 300) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<double> v;
  for (int i = 0; i < n; ++i) v.push_back((i % 3) * 40.0 + 3.0 * z(rng));
  return v;
}

}  // namespace

TEST(Displace, OffsetsAndLeapDay) {
  EXPECT_EQ(displace(make_date(2016, 3, 10), 0, 1), make_date(2015, 3, 10));
  EXPECT_EQ(displace(make_date(2016, 3, 10), 5, 0), make_date(2016, 3, 5));
  EXPECT_EQ(displace(make_date(2016, 3, 10), -5, 2), make_date(2014, 3, 15));
  EXPECT_EQ(displace(make_date(2016, 2, 29), 0, 1), make_date(2015, 2, 28));
  EXPECT_EQ(displace(make_date(2016, 2, 29), 0, 4), make_date(2012, 2, 29));
  EXPECT_EQ(displace(make_date(2016, 1, 2), 3, 0), make_date(2015, 12, 30));
}

TEST(Library, CsvRoundTripAndUpsampling) {
  const auto lib = library(PathRole::Pool, 1);
  const auto path = lib.find(make_date(2014, 6, 1));
  ASSERT_TRUE(path);
  ASSERT_EQ(path->size(), kSlotsPerDay);
  for (int h = 0; h < 24; ++h) EXPECT_EQ((*path)[2 * h], (*path)[2 * h + 1]);
  const auto again = PathLibrary::parse_csv(lib.to_csv(), PathRole::Pool);
  ASSERT_EQ(again.size(), lib.size());
  EXPECT_EQ(*again.find(make_date(2014, 6, 1)), *path);
}

TEST(Library, SolarStaysInUnitInterval) {
  const auto lib = library(PathRole::Solar, 2);
  for (const auto& d : lib.dates()) {
    const auto& p = *lib.find(d);
    ASSERT_GE(p.minCoeff(), 0.0);
    ASSERT_LE(p.maxCoeff(), 1.0);
  }
}

TEST(Library, MissingDateInHorizon) {
  PathLibrary lib(PathRole::Pool);
  lib.add(make_date(2015, 1, 1), Eigen::VectorXd::Ones(kSlotsPerDay));
  const std::vector<Date> dates{make_date(2015, 1, 1), make_date(2015, 1, 2)};
  try {
    lib.horizon_path(dates);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoPathInRange);
  }
}

TEST(DateDistances, PmfsNormalized) {
  const auto lib = library(PathRole::Pool, 3);
  const auto d = fit_date_distributions(lib, fixtures::library_split());
  double a = 0.0, b = 0.0;
  for (const auto& [k, v] : d.day_offset) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(std::abs(k), 182);
    a += v;
  }
  for (const auto& [k, v] : d.year_offset) b += v;
  EXPECT_NEAR(a, 1.0, 1e-12);
  EXPECT_NEAR(b, 1.0, 1e-12);
  for (const auto& c : comparison_dates(lib, fixtures::library_split())) {
    EXPECT_TRUE(year_of(c) != 2015 && year_of(c) != 2016);
  }
}

TEST(Sampling, DeterministicAndSeedSensitive) {
  const auto lib = library(PathRole::Pool, 4);
  const auto dist = fit_date_distributions(lib, fixtures::library_split());
  const auto dates = fixtures::horizon_dates(make_date(2016, 12, 1), 3);
  const auto a = sample_paths(lib, dist, dates, 20, 7);
  const auto b = sample_paths(lib, dist, dates, 20, 7);
  const auto c = sample_paths(lib, dist, dates, 20, 8);
  ASSERT_EQ(a.size(), 20u);
  EXPECT_EQ(a[5].size(), 3 * kSlotsPerDay);
  bool differ = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    differ = differ || a[i] != c[i];
  }
  EXPECT_TRUE(differ);
  // Every sampled day is some library day.
  const auto u = sample_uniform_paths(lib, fixtures::library_split(), dates, 5, 1);
  for (const auto& p : u) {
    const Eigen::VectorXd day = p.head(kSlotsPerDay);
    const auto ds = lib.dates();
    EXPECT_TRUE(std::any_of(ds.begin(), ds.end(), [&](Date d) { return *lib.find(d) == day; }));
  }
}

TEST(Assemble, EqualProbabilitiesAndValidation) {
  const auto set = fixtures::synthetic_set(2, 40, 5);
  ASSERT_EQ(set.size(), 40u);
  set.validate();
  for (const auto& s : set.scenarios) EXPECT_DOUBLE_EQ(s.probability, 1.0 / 40);
  std::vector<Eigen::VectorXd> pool(3, Eigen::VectorXd::Ones(48)), solar(2, Eigen::VectorXd::Ones(48));
  try {
    assemble(pool, solar, {-1, -1, -1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
  }
}

TEST(Silverman, EqualWeightsOracle) {
  std::vector<double> v(100), w(100, 1.0);
  std::iota(v.begin(), v.end(), 0.0);
  const double mean = 49.5;
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / 100.0);
  EXPECT_NEAR(silverman_bandwidth(v, w), 0.9 * sd * std::pow(100.0, -0.2), 1e-9);
}

TEST(MeanShift, PartitionAndSpacing) {
  const auto v = clustered_values(1);
  const std::vector<double> w(v.size(), 1.0 / v.size());
  const auto r = reduce_by_objective(v, w, 10.0);
  ASSERT_EQ(r.probabilities.size(), 3u);
  ASSERT_EQ(r.labels.size(), v.size());
  std::vector<double> mass(r.probabilities.size(), 0.0);
  for (std::size_t i = 0; i < v.size(); ++i) mass[static_cast<std::size_t>(r.labels[i])] += w[i];
  for (std::size_t k = 0; k < mass.size(); ++k) EXPECT_NEAR(mass[k], r.probabilities[k], 1e-12);
  EXPECT_NEAR(std::accumulate(r.probabilities.begin(), r.probabilities.end(), 0.0), 1.0, 1e-12);
  for (std::size_t k = 0; k < r.representatives.size(); ++k) {
    EXPECT_EQ(r.labels[static_cast<std::size_t>(r.representatives[k])], static_cast<int>(k));
    if (k > 0) {
      EXPECT_GT(v[static_cast<std::size_t>(r.representatives[k])] - v[static_cast<std::size_t>(r.representatives[k - 1])],
                r.bandwidth);
    }
  }
}

TEST(MeanShift, PermutationInvariant) {
  auto v = clustered_values(2, 200);
  std::vector<double> w(v.size());
  std::mt19937_64 rng(3);
  for (auto& x : w) x = 0.5 + std::uniform_real_distribution<double>(0, 1)(rng);
  const auto a = reduce_by_objective(v, w, 8.0);
  std::vector<std::size_t> perm(v.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<double> pv, pw;
  for (auto i : perm) {
    pv.push_back(v[i]);
    pw.push_back(w[i]);
  }
  const auto b = reduce_by_objective(pv, pw, 8.0);
  ASSERT_EQ(a.modes.size(), b.modes.size());
  for (std::size_t k = 0; k < a.modes.size(); ++k) {
    EXPECT_NEAR(a.modes[k], b.modes[k], 1e-9);
    EXPECT_NEAR(a.probabilities[k], b.probabilities[k], 1e-12);
  }
  for (std::size_t i = 0; i < perm.size(); ++i) EXPECT_EQ(b.labels[i], a.labels[perm[i]]);
}

TEST(MeanShift, Idempotent) {
  const auto v = clustered_values(4);
  const std::vector<double> w(v.size(), 1.0);
  const auto a = reduce_by_objective(v, w);
  std::vector<double> rv;
  for (int idx : a.representatives) rv.push_back(v[static_cast<std::size_t>(idx)]);
  const auto b = reduce_by_objective(rv, a.probabilities, a.bandwidth);
  ASSERT_EQ(b.probabilities.size(), a.probabilities.size());
  for (std::size_t k = 0; k < a.probabilities.size(); ++k) {
    EXPECT_NEAR(b.probabilities[k], a.probabilities[k], 1e-12);
    EXPECT_EQ(b.representatives[k], static_cast<int>(k));
  }
}

TEST(MeanShift, ZeroBandwidth) {
  const std::vector<double> v{1.0, 1.0, 1.0}, w{1.0, 1.0, 1.0};
  const auto r = reduce_by_objective(v, w);
  ASSERT_EQ(r.probabilities.size(), 1u);
  EXPECT_NEAR(r.probabilities[0], 3.0, 1e-15);
  const std::vector<double> u{1.0, 2.0, 3.0};
  try {
    reduce_by_objective(u, w, 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroBandwidth);
  }
}

TEST(Wasserstein, HandComputed) {
  const std::vector<double> a{0.0}, wa{1.0}, b{1.0}, wb{1.0};
  EXPECT_NEAR(wasserstein1(a, wa, b, wb), 1.0, 1e-15);
  const std::vector<double> c{0.0, 1.0}, wc{0.5, 0.5}, d{0.5}, wd{1.0};
  EXPECT_NEAR(wasserstein1(c, wc, d, wd), 0.5, 1e-15);
  EXPECT_NEAR(wasserstein1(c, wc, c, wc), 0.0, 1e-15);
}

TEST(Reduce, SetCarriesProvenance) {
  const auto set = fixtures::synthetic_set(1, 120, 6);
  const auto spec = fixtures::synthetic_spec(1);
  const auto red = reduce(set, spec);
  EXPECT_EQ(red.provenance, Provenance::Reduced);
  EXPECT_EQ(red.cluster_map.size(), set.size());
  EXPECT_EQ(red.representatives.size(), red.size());
  red.validate();
  for (std::size_t k = 0; k < red.size(); ++k) {
    const auto& rep = set.scenarios[static_cast<std::size_t>(red.representatives[k])];
    EXPECT_EQ(red.scenarios[k].pool, rep.pool);
    EXPECT_EQ(red.scenarios[k].beta, rep.beta);
  }
  const auto again = reduce(red, spec);
  EXPECT_EQ(again.size(), red.size());
}
