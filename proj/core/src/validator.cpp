#include <cmath>
#include <cstdio>

#include "tariffopt/optimizer.hpp"

namespace tariffopt::optimizer {

namespace {

class Checker {
 public:
  explicit Checker(double tol) : tol_(tol) {}

  // |lhs - rhs| within tol scaled by the magnitude of the quantities involved.
  void equal(const char* what, double lhs, double rhs, Eigen::Index t = -1, Eigen::Index w = -1) {
    const double scale = 1.0 + std::max(std::abs(lhs), std::abs(rhs));
    if (!(std::abs(lhs - rhs) <= tol_ * scale)) fail(what, lhs, rhs, t, w);
  }
  void at_least(const char* what, double value, double bound, Eigen::Index t = -1, Eigen::Index w = -1) {
    if (!(value >= bound - tol_ * (1.0 + std::abs(bound)))) fail(what, value, bound, t, w);
  }

  ValidationReport report;

 private:
  void fail(const char* what, double a, double b, Eigen::Index t, Eigen::Index w) {
    report.ok = false;
    if (report.failures.size() >= 50) return;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s violated%s%s: %.12g vs %.12g", what,
                  t >= 0 ? (" at slot " + std::to_string(t)).c_str() : "",
                  w >= 0 ? (" scenario " + std::to_string(w)).c_str() : "", a, b);
    report.failures.emplace_back(buf);
  }
  double tol_;
};

}  // namespace

ValidationReport validate_solution(const ProblemSpec& spec, const scenarios::ScenarioSet& set,
                                   const TariffSolution& sol, double tolerance) {
  Checker c(tolerance);
  const auto T = static_cast<Eigen::Index>(spec.horizon);
  const auto W = static_cast<Eigen::Index>(set.size());
  auto shape_ok = [&](const Eigen::MatrixXd& m) { return m.rows() == T && m.cols() == W; };
  if (sol.lambdaE.size() != T || !shape_ok(sol.retail_price) || !shape_ok(sol.demand) ||
      !shape_ok(sol.pool_purchase) || !shape_ok(sol.ppa_delivered) || sol.profit_per_scenario.size() != W ||
      sol.s.size() != W || sol.probabilities.size() != W) {
    c.report.ok = false;
    c.report.failures.push_back("solution arrays do not match the horizon and scenario count");
    return c.report;
  }
  const bool indexed = sol.price_regulation == PriceRegulation::Indexed;
  const double kappa = 1.0 / (1.0 - sol.alpha);
  double expected = 0.0, tail = 0.0;
  for (Eigen::Index w = 0; w < W; ++w) {
    const auto& sc = set.scenarios[static_cast<std::size_t>(w)];
    c.equal("probability", sol.probabilities[w], sc.probability, -1, w);
    double revenue_minus_cost = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      const double price = sol.retail_price(t, w);
      const double d = sol.demand(t, w);
      c.equal("(6d) demand", d, sc.beta * price + spec.baseline_demand[t], t, w);
      c.equal("(6e) balance", d, sol.pool_purchase(t, w) + sol.pB + sol.ppa_delivered(t, w), t, w);
      c.equal("(6g) ppa delivery", sol.ppa_delivered(t, w), sc.availability[t] * sol.pC_ppa, t, w);
      if (indexed) {
        c.equal("(6h) indexed price", price, sol.lambdaE[t] + sc.pool[t] - spec.lambdaE_bar, t, w);
      } else {
        c.equal("free price", price, sol.lambdaE[t], t, w);
      }
      revenue_minus_cost += price * d - sc.pool[t] * sol.pool_purchase(t, w) - spec.pB_price * sol.pB -
                            spec.ppa_price * sol.ppa_delivered(t, w);
    }
    const double p = sol.profit_per_scenario[w];
    c.equal("scenario profit", p, revenue_minus_cost / 100.0, -1, w);
    c.at_least("s >= 0", sol.s[w], 0.0, -1, w);
    c.at_least("s >= eta - profit", sol.s[w], sol.eta - p, -1, w);
    expected += sc.probability * p;
    tail += sc.probability * sol.s[w];
  }
  if (indexed) {
    const double lo = (1.0 - spec.gamma) * spec.lambdaE_bar;
    const double hi = (1.0 + spec.gamma) * spec.lambdaE_bar;
    const int S = spec.slots_per_day;
    for (int d = 0; d < spec.days(); ++d) {
      c.equal("(6i) daily mean", sol.lambdaE.segment(static_cast<Eigen::Index>(d) * S, S).mean(),
              spec.lambdaE_bar, static_cast<Eigen::Index>(d) * S);
    }
    for (Eigen::Index t = 0; t < T; ++t) {
      c.at_least("(6j) lower band", sol.lambdaE[t], lo, t);
      c.at_least("(6j) upper band", hi, sol.lambdaE[t], t);
    }
  }
  c.at_least("pB >= 0", sol.pB, 0.0);
  c.at_least("pB <= max", spec.pB_max, sol.pB);
  c.at_least("pC >= 0", sol.pC_ppa, 0.0);
  c.at_least("pC <= max", spec.ppa_max, sol.pC_ppa);
  c.equal("expected profit", sol.expected_profit, expected);
  c.equal("cvar", sol.cvar, sol.eta - kappa * tail);
  return c.report;
}

}  // namespace tariffopt::optimizer
