#include <gtest/gtest.h>

#include <algorithm>
#include <limits>
#include <random>

#include <tariffopt/error.hpp>
#include <tariffopt/experiments.hpp>
#include <tariffopt/optimizer.hpp>

#include "fixtures.hpp"

using namespace tariffopt;
using namespace tariffopt::optimizer;

namespace {

ProblemSpec single_slot(double baseline, PriceRegulation reg) {
  ProblemSpec spec;
  spec.horizon = 1;
  spec.slots_per_day = 1;
  spec.baseline_demand = Eigen::VectorXd::Constant(1, baseline);
  spec.pB_max = 0.0;
  spec.ppa_max = 0.0;
  spec.price_regulation = reg;
  return spec;
}

scenarios::Scenario one(double pool, double beta, double prob = 1.0, double solar = 0.0) {
  return {Eigen::VectorXd::Constant(1, pool), Eigen::VectorXd::Constant(1, solar), beta, prob};
}

const scenarios::ScenarioSet& small_set() {
  static const auto set = fixtures::synthetic_set(1, 12, 3);
  return set;
}

}  // namespace

TEST(Cvar, TwoScenarioToy) {
  Eigen::VectorXd p(2), pi(2);
  p << 0.0, 10.0;
  pi << 0.5, 0.5;
  const auto r = cvar(p, pi, 0.9);
  EXPECT_NEAR(r.cvar, 0.0, 1e-15);
  EXPECT_NEAR(r.var, 0.0, 1e-15);
}

TEST(Cvar, MatchesEnumerationOnRandomData) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 200; ++rep) {
    const int m = 1 + rep % 17;
    Eigen::VectorXd p(m), pi(m);
    for (int i = 0; i < m; ++i) {
      p[i] = 100.0 * u(rng) - 50.0;
      pi[i] = u(rng) + 0.01;
    }
    pi /= pi.sum();
    const double alpha = 0.05 + 0.9 * u(rng);
    EXPECT_NEAR(cvar(p, pi, alpha).cvar, fixtures::cvar_enumerated(p, pi, alpha), 1e-10);
    const auto [cv, eta] = cvar_crossover(p, pi, alpha, p.mean());
    EXPECT_NEAR(cv, fixtures::cvar_enumerated(p, pi, alpha), 1e-10);
    // CVaR never exceeds the mean nor falls below the worst profit.
    EXPECT_LE(cv, pi.dot(p) + 1e-10);
    EXPECT_GE(cv, p.minCoeff() - 1e-10);
  }
}

TEST(FreePrice, SingleSlotClosedForm) {
  // max (l - 6)(20 - 2 l): l = 8, profit 8 pence.
  const auto spec = single_slot(20.0, PriceRegulation::Free);
  scenarios::ScenarioSet set;
  set.scenarios.push_back(one(6.0, -2.0));
  const auto sol = solve_free_price(spec, set);
  EXPECT_NEAR(sol.lambdaE[0], 8.0, 1e-7);
  EXPECT_NEAR(sol.expected_profit, 0.08, 1e-9);
  EXPECT_NEAR(sol.demand(0, 0), 4.0, 1e-6);
  EXPECT_TRUE(validate_solution(spec, set, sol).ok);
}

TEST(FreePrice, TwoScenarioClosedForm) {
  // Expected profit sum_w pi_w (l - c_w)(D + b_w l) is quadratic in l.
  const auto spec = single_slot(30.0, PriceRegulation::Free);
  scenarios::ScenarioSet set;
  set.scenarios.push_back(one(5.0, -1.0, 0.3));
  set.scenarios.push_back(one(9.0, -3.0, 0.7));
  const double a = 0.3 * -1.0 + 0.7 * -3.0;
  const double b = 0.3 * (30.0 + 5.0) + 0.7 * (30.0 + 27.0);
  const double l = -b / (2.0 * a);
  const auto sol = solve_free_price(spec, set);
  EXPECT_NEAR(sol.lambdaE[0], l, 1e-6);
}

TEST(Indexed, ZeroBandFixesRetailToPool) {
  auto spec = single_slot(10.0, PriceRegulation::Indexed);
  spec.gamma = 0.0;
  spec.lambdaE_bar = 2.0;
  scenarios::ScenarioSet set;
  set.scenarios.push_back(one(7.0, -0.5));
  const auto sol = solve_stochastic(spec, set);
  EXPECT_NEAR(sol.retail_price(0, 0), 7.0, 1e-9);
  // Retail equals pool, so the margin is zero.
  EXPECT_NEAR(sol.expected_profit, 0.0, 1e-9);
}

TEST(Contracts, BangBangBelowAndAbovePool) {
  auto spec = fixtures::synthetic_spec(1);
  const auto& set = small_set();
  double pool = 0.0;
  for (const auto& s : set.scenarios) pool += s.probability * s.pool.mean();
  spec.pB_price = pool - 3.0;
  spec.ppa_price = pool + 50.0;
  auto sol = solve_stochastic(spec, set);
  EXPECT_NEAR(sol.pB, spec.pB_max, 1e-6 * spec.pB_max);
  EXPECT_NEAR(sol.pC_ppa, 0.0, 1e-6 * spec.ppa_max);
  spec.pB_price = pool + 50.0;
  sol = solve_stochastic(spec, set);
  EXPECT_NEAR(sol.pB, 0.0, 1e-6 * spec.pB_max);
}

TEST(Stochastic, IndexedPricesRespectBandAndDailyMean) {
  const auto spec = fixtures::synthetic_spec(1);
  const auto sol = solve_stochastic(spec, small_set());
  EXPECT_NEAR(sol.lambdaE.mean(), spec.lambdaE_bar, 1e-8);
  EXPECT_GE(sol.lambdaE.minCoeff(), (1 - spec.gamma) * spec.lambdaE_bar - 1e-8);
  EXPECT_LE(sol.lambdaE.maxCoeff(), (1 + spec.gamma) * spec.lambdaE_bar + 1e-8);
  EXPECT_EQ(sol.report.status, SolveStatus::Optimal);
  EXPECT_TRUE(validate_solution(spec, small_set(), sol).ok);
}

TEST(Stochastic, SingleScenarioMatchesDeterministic) {
  auto spec = fixtures::synthetic_spec(1);
  scenarios::ScenarioSet set;
  set.scenarios.push_back(small_set().scenarios[2]);
  set.scenarios[0].probability = 1.0;
  const auto a = solve_stochastic(spec, set);
  const auto b = solve_deterministic(spec, small_set().scenarios[2]);
  EXPECT_NEAR(a.objective, b.objective, 1e-6 * std::abs(a.objective));
}

TEST(Stochastic, DuplicatingScenariosChangesNothing) {
  auto spec = fixtures::synthetic_spec(1);
  spec.chi = 0.4;
  const auto& set = small_set();
  scenarios::ScenarioSet dup;
  for (const auto& s : set.scenarios) {
    auto h = s;
    h.probability = s.probability / 2;
    dup.scenarios.push_back(h);
    dup.scenarios.push_back(h);
  }
  const auto a = solve_stochastic(spec, set);
  const auto b = solve_stochastic(spec, dup);
  EXPECT_NEAR(a.objective, b.objective, 1e-6 * std::abs(a.objective));
  EXPECT_NEAR(a.cvar, b.cvar, 1e-5 * std::abs(a.cvar) + 1e-6);
}

TEST(Stochastic, FullRiskAversionMaximizesCvar) {
  auto spec = fixtures::synthetic_spec(1);
  const auto& set = small_set();
  spec.chi = 1.0;
  const auto averse = solve_stochastic(spec, set);
  EXPECT_NEAR(averse.objective, averse.cvar, 1e-9);
  for (double chi : {0.0, 0.3, 0.7}) {
    spec.chi = chi;
    const auto other = solve_stochastic(spec, set);
    EXPECT_LE(other.cvar, averse.cvar + 1e-6);
    EXPECT_GE(other.expected_profit, averse.expected_profit - 1e-6);
  }
}

TEST(Stochastic, ObjectiveDecomposes) {
  auto spec = fixtures::synthetic_spec(1);
  spec.chi = 0.5;
  const auto sol = solve_stochastic(spec, small_set());
  const auto fs = sol.first_stage();
  for (std::size_t w = 0; w < small_set().size(); ++w) {
    EXPECT_NEAR(sol.profit_per_scenario[static_cast<Eigen::Index>(w)], profit(spec, small_set().scenarios[w], fs),
                1e-9);
  }
  EXPECT_NEAR(sol.objective, 0.5 * sol.expected_profit + 0.5 * sol.cvar, 1e-9);
}

TEST(Validator, CatchesCorruption) {
  const auto spec = fixtures::synthetic_spec(1);
  const auto& set = small_set();
  const auto sol = solve_stochastic(spec, set);
  ASSERT_TRUE(validate_solution(spec, set, sol).ok);

  auto bad = sol;
  bad.pB = spec.pB_max * 1.5;
  EXPECT_FALSE(validate_solution(spec, set, bad).ok);
  bad = sol;
  bad.lambdaE[3] += 0.5;
  EXPECT_FALSE(validate_solution(spec, set, bad).ok);
  bad = sol;
  bad.profit_per_scenario[0] += 1.0;
  EXPECT_FALSE(validate_solution(spec, set, bad).ok);
  bad = sol;
  bad.pool_purchase(5, 1) -= 2.0;
  EXPECT_FALSE(validate_solution(spec, set, bad).ok);
  bad = sol;
  bad.cvar += 1.0;
  EXPECT_FALSE(validate_solution(spec, set, bad).ok);
}

TEST(Spec, InvalidInputs) {
  auto spec = fixtures::synthetic_spec(1);
  spec.chi = 1.5;
  EXPECT_THROW(spec.validate(), Error);
  spec = fixtures::synthetic_spec(1);
  spec.alpha = 1.0;
  EXPECT_THROW(spec.validate(), Error);
  spec = fixtures::synthetic_spec(1);
  spec.baseline_demand.resize(10);
  EXPECT_THROW(solve_stochastic(spec, small_set()), Error);
}

TEST(Ipm, BoxQpClosedForm) {
  // maximize sum -0.5 (x_i - c_i)^2 over [0, 1]: x = clamp(c).
  ScenarioQp qp;
  const int n = 6;
  qp.lower = Eigen::VectorXd::Zero(n);
  qp.upper = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd c(n);
  c << -0.5, 0.2, 0.5, 0.9, 1.7, 3.0;
  QuadProfit p;
  p.h = Eigen::VectorXd::Constant(n, -1.0);
  p.g = c;
  p.k = -0.5 * c.squaredNorm();
  qp.profits.push_back(p);
  qp.probabilities = Eigen::VectorXd::Ones(1);
  IpmOptions tight;
  tight.gap_tol = 1e-11;
  tight.feasibility_tol = 1e-11;
  const auto r = solve_ipm(qp, tight);
  ASSERT_EQ(r.status, SolveStatus::Optimal);
  for (int i = 0; i < n; ++i) EXPECT_NEAR(r.x[i], std::clamp(c[i], 0.0, 1.0), 1e-7);
}

TEST(Ipm, EqualityConstrainedClosedForm) {
  // maximize -0.5 |x|^2 + g'x s.t. sum x = 1: x = g - mean(g) + 1/n.
  ScenarioQp qp;
  const int n = 4;
  const double inf = std::numeric_limits<double>::infinity();
  qp.lower = Eigen::VectorXd::Constant(n, -inf);
  qp.upper = Eigen::VectorXd::Constant(n, inf);
  qp.A = Eigen::MatrixXd::Ones(1, n);
  qp.b = Eigen::VectorXd::Ones(1);
  QuadProfit p;
  p.h = Eigen::VectorXd::Constant(n, -1.0);
  p.g.resize(n);
  p.g << 1.0, -2.0, 0.5, 3.0;
  qp.profits.push_back(p);
  qp.probabilities = Eigen::VectorXd::Ones(1);
  const auto r = solve_ipm(qp);
  const Eigen::VectorXd expect = p.g.array() - p.g.mean() + 1.0 / n;
  EXPECT_LT((r.x - expect).lpNorm<Eigen::Infinity>(), 1e-7);
}

TEST(Frontier, MonotoneOnSmallSet) {
  const auto spec = fixtures::synthetic_spec(1);
  experiments::SolveSettings s;
  s.threads = 1;
  const auto f = experiments::efficient_frontier(spec, small_set(), experiments::chi_grid(0.25), s);
  ASSERT_EQ(f.points.size(), 5u);
  EXPECT_TRUE(f.monotone());
  EXPECT_EQ(f.validator_failures, 0);
}

TEST(Experiments, WeightedQuantilesAndEcdf) {
  Eigen::VectorXd v(4), w(4);
  v << 3, 1, 4, 2;
  w << 0.25, 0.25, 0.25, 0.25;
  const auto q = experiments::weighted_quantiles(v, w);
  EXPECT_DOUBLE_EQ(q.min, 1.0);
  EXPECT_DOUBLE_EQ(q.max, 4.0);
  const auto e = experiments::weighted_ecdf(v, w);
  ASSERT_EQ(e.size(), 4u);
  EXPECT_DOUBLE_EQ(e.front().first, 1.0);
  EXPECT_DOUBLE_EQ(e.front().second, 0.25);
  EXPECT_DOUBLE_EQ(e.back().second, 1.0);
}
