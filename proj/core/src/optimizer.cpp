#include "tariffopt/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tariffopt/error.hpp"

namespace tariffopt::optimizer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPencePerPound = 100.0;

struct Band {
  double lo = 0.0;
  double hi = 0.0;
  bool fixed() const { return lo == hi; }
};

Band price_band(const ProblemSpec& spec) {
  return {(1.0 - spec.gamma) * spec.lambdaE_bar, (1.0 + spec.gamma) * spec.lambdaE_bar};
}

void check_concavity(const ProblemSpec& spec, const scenarios::ScenarioSet& set) {
  std::size_t non_negative = 0;
  std::size_t first = 0;
  for (std::size_t w = 0; w < set.size(); ++w) {
    if (!(set.scenarios[w].beta < 0.0)) {
      if (non_negative == 0) first = w;
      ++non_negative;
    }
  }
  if (non_negative == 0) return;
  if (spec.price_regulation == PriceRegulation::Free && non_negative == set.size()) {
    throw Error(ErrorCode::Unbounded, "every scenario has beta >= 0, the free retail price is unbounded");
  }
  throw Error(ErrorCode::NonConcave, std::to_string(non_negative) + " scenario(s) have beta >= 0 (first: scenario " +
                                         std::to_string(first) + ", beta " +
                                         std::to_string(set.scenarios[first].beta) + ")");
}

// Moves each day's variable prices onto the exact mean, keeping them in the band.
void project_day_means(const ProblemSpec& spec, Eigen::VectorXd& v) {
  const Band band = price_band(spec);
  const int S = spec.slots_per_day;
  for (int d = 0; d < spec.days(); ++d) {
    auto seg = v.segment(static_cast<Eigen::Index>(d) * S, S);
    seg = seg.cwiseMax(band.lo).cwiseMin(band.hi);
    for (int pass = 0; pass < 8; ++pass) {
      const double deficit = S * spec.lambdaE_bar - seg.sum();
      if (deficit == 0.0) break;
      int movable = 0;
      for (Eigen::Index t = 0; t < S; ++t) {
        if ((deficit > 0.0 && seg[t] < band.hi) || (deficit < 0.0 && seg[t] > band.lo)) ++movable;
      }
      if (movable == 0) break;
      const double step = deficit / movable;
      for (Eigen::Index t = 0; t < S; ++t) {
        if ((deficit > 0.0 && seg[t] < band.hi) || (deficit < 0.0 && seg[t] > band.lo)) {
          seg[t] = std::clamp(seg[t] + step, band.lo, band.hi);
        }
      }
    }
  }
}

}  // namespace

std::string to_string(PriceRegulation r) { return r == PriceRegulation::Indexed ? "indexed" : "free"; }

PriceRegulation parse_price_regulation(std::string_view text) {
  if (text == "indexed" || text == "Indexed") return PriceRegulation::Indexed;
  if (text == "free" || text == "Free") return PriceRegulation::Free;
  throw Error(ErrorCode::InvalidConfig, "unknown price regulation '" + std::string(text) + "'");
}

void ProblemSpec::validate() const {
  if (horizon < 1) throw Error(ErrorCode::InvalidConfig, "horizon must be >= 1");
  if (slots_per_day < 1) throw Error(ErrorCode::InvalidConfig, "slots_per_day must be >= 1");
  if (price_regulation == PriceRegulation::Indexed && horizon % slots_per_day != 0) {
    throw Error(ErrorCode::InvalidConfig, "horizon " + std::to_string(horizon) + " is not a whole number of " +
                                              std::to_string(slots_per_day) + "-slot days");
  }
  if (baseline_demand.size() != horizon) {
    throw Error(ErrorCode::LengthMismatch, "baseline demand has " + std::to_string(baseline_demand.size()) +
                                               " slots, horizon is " + std::to_string(horizon));
  }
  if (!baseline_demand.allFinite()) throw Error(ErrorCode::InvalidConfig, "baseline demand is not finite");
  if (!(chi >= 0.0 && chi <= 1.0)) throw Error(ErrorCode::InvalidConfig, "chi must lie in [0,1]");
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0,1)");
  if (!(gamma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "gamma must be >= 0");
  if (!(pB_max >= 0.0 && ppa_max >= 0.0)) throw Error(ErrorCode::InvalidConfig, "contract maxima must be >= 0");
  for (double v : {lambdaE_bar, pB_price, ppa_price}) {
    if (!std::isfinite(v)) throw Error(ErrorCode::InvalidConfig, "prices must be finite");
  }
}

Eigen::VectorXd retail_prices(const ProblemSpec& spec, const scenarios::Scenario& scenario, const FirstStage& x) {
  if (spec.price_regulation == PriceRegulation::Free) return x.lambdaE;
  return x.lambdaE + scenario.pool - Eigen::VectorXd::Constant(scenario.pool.size(), spec.lambdaE_bar);
}

double profit(const ProblemSpec& spec, const scenarios::Scenario& scenario, const FirstStage& x) {
  const Eigen::VectorXd price = retail_prices(spec, scenario, x);
  double total = 0.0;
  for (Eigen::Index t = 0; t < price.size(); ++t) {
    const double demand = scenario.beta * price[t] + spec.baseline_demand[t];
    const double ppa = scenario.availability[t] * x.pC_ppa;
    const double pool = demand - x.pB - ppa;
    total += price[t] * demand - scenario.pool[t] * pool - spec.pB_price * x.pB - spec.ppa_price * ppa;
  }
  return total / kPencePerPound;
}

CvarResult cvar(const Eigen::VectorXd& profits, const Eigen::VectorXd& probs, double alpha) {
  if (profits.size() == 0 || profits.size() != probs.size()) {
    throw Error(ErrorCode::LengthMismatch, "profits and probabilities must be non-empty and equal in length");
  }
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0,1)");
  const double kappa = 1.0 / (1.0 - alpha);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(profits.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return profits[a] < profits[b]; });
  // At eta = P_(k) the tail covers every scenario sorted before k.
  CvarResult best{-kInf, 0.0};
  double mass = 0.0, weighted = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double eta = profits[order[k]];
    const double value = eta - kappa * (mass * eta - weighted);
    if (value > best.cvar) best = {value, eta};
    mass += probs[order[k]];
    weighted += probs[order[k]] * eta;
  }
  return best;
}

Formulation formulate(const ProblemSpec& spec, const scenarios::ScenarioSet& set) {
  spec.validate();
  set.validate();
  if (set.horizon() != spec.horizon) {
    throw Error(ErrorCode::LengthMismatch, "scenario horizon " + std::to_string(set.horizon()) +
                                               " differs from spec horizon " + std::to_string(spec.horizon));
  }
  check_concavity(spec, set);
  const bool indexed = spec.price_regulation == PriceRegulation::Indexed;
  const Band band = price_band(spec);
  if (indexed && band.lo > band.hi) {
    throw Error(ErrorCode::Infeasible, "empty variable-price band [" + std::to_string(band.lo) + ", " +
                                           std::to_string(band.hi) + "]");
  }
  const int T = spec.horizon;

  Formulation f;
  f.fixed.lambdaE = Eigen::VectorXd::Constant(T, spec.lambdaE_bar);
  f.price_var.assign(static_cast<std::size_t>(T), -1);
  Eigen::Index n = 0;
  const bool price_free = !indexed || !band.fixed();
  if (price_free) {
    for (int t = 0; t < T; ++t) f.price_var[static_cast<std::size_t>(t)] = n++;
  }
  if (spec.pB_max > 0.0) f.pB_var = n++;
  if (spec.ppa_max > 0.0) f.pC_var = n++;

  auto& qp = f.qp;
  qp.lower = Eigen::VectorXd::Constant(n, -kInf);
  qp.upper = Eigen::VectorXd::Constant(n, kInf);
  if (price_free && indexed) {
    for (int t = 0; t < T; ++t) {
      qp.lower[f.price_var[static_cast<std::size_t>(t)]] = band.lo;
      qp.upper[f.price_var[static_cast<std::size_t>(t)]] = band.hi;
    }
  }
  for (auto idx : {f.pB_var, f.pC_var}) {
    if (idx >= 0) {
      qp.lower[idx] = 0.0;
      qp.upper[idx] = 1.0;
    }
  }
  if (price_free && indexed) {
    const int S = spec.slots_per_day;
    qp.A = Eigen::MatrixXd::Zero(spec.days(), n);
    qp.b = Eigen::VectorXd::Constant(spec.days(), S * spec.lambdaE_bar);
    for (int t = 0; t < T; ++t) qp.A(t / S, f.price_var[static_cast<std::size_t>(t)]) = 1.0;
  }
  qp.chi = spec.chi;
  qp.alpha = spec.alpha;
  qp.probabilities = set.probabilities();

  // Per scenario, in pence: sum_t beta v^2 + (e + beta a) v + a e plus linear contract terms,
  // where retail = v + o, a = o - pool and e = beta o + D.
  const double scale = 1.0 / kPencePerPound;
  for (const auto& sc : set.scenarios) {
    QuadProfit P;
    P.g = Eigen::VectorXd::Zero(n);
    P.h = Eigen::VectorXd::Zero(n);
    double k = 0.0;
    const double beta = sc.beta;
    for (int t = 0; t < T; ++t) {
      const double o = indexed ? sc.pool[t] - spec.lambdaE_bar : 0.0;
      const double a = o - sc.pool[t];
      const double e = beta * o + spec.baseline_demand[t];
      const auto idx = f.price_var[static_cast<std::size_t>(t)];
      if (idx >= 0) {
        P.h[idx] = 2.0 * beta * scale;
        P.g[idx] = (e + beta * a) * scale;
        k += a * e;
      } else {
        const double v = f.fixed.lambdaE[t];
        k += beta * v * v + (e + beta * a) * v + a * e;
      }
    }
    double gB = 0.0, gC = 0.0;
    for (int t = 0; t < T; ++t) {
      gB += (sc.pool[t] - spec.pB_price) * spec.pB_max;
      gC += sc.availability[t] * (sc.pool[t] - spec.ppa_price) * spec.ppa_max;
    }
    if (f.pB_var >= 0) P.g[f.pB_var] = gB * scale;
    if (f.pC_var >= 0) P.g[f.pC_var] = gC * scale;
    P.k = k * scale;
    qp.profits.push_back(std::move(P));
  }

  // Start prices at the expected-profit stationary point when they are unbounded.
  qp.x0 = Eigen::VectorXd::Zero(n);
  for (int t = 0; t < T; ++t) {
    const auto idx = f.price_var[static_cast<std::size_t>(t)];
    if (idx < 0) continue;
    if (indexed) {
      qp.x0[idx] = spec.lambdaE_bar;
    } else {
      double hh = 0.0, gg = 0.0;
      for (std::size_t w = 0; w < qp.profits.size(); ++w) {
        hh += qp.probabilities[static_cast<Eigen::Index>(w)] * qp.profits[w].h[idx];
        gg += qp.probabilities[static_cast<Eigen::Index>(w)] * qp.profits[w].g[idx];
      }
      qp.x0[idx] = hh < 0.0 ? -gg / hh : 0.0;
    }
  }
  for (auto idx : {f.pB_var, f.pC_var}) {
    if (idx >= 0) qp.x0[idx] = 0.5;
  }
  return f;
}

FirstStage decode(const ProblemSpec& spec, const Formulation& f, const Eigen::VectorXd& x) {
  FirstStage out = f.fixed;
  for (int t = 0; t < spec.horizon; ++t) {
    const auto idx = f.price_var[static_cast<std::size_t>(t)];
    if (idx >= 0) out.lambdaE[t] = x[idx];
  }
  out.pB = f.pB_var >= 0 ? std::clamp(x[f.pB_var], 0.0, 1.0) * spec.pB_max : 0.0;
  out.pC_ppa = f.pC_var >= 0 ? std::clamp(x[f.pC_var], 0.0, 1.0) * spec.ppa_max : 0.0;
  return out;
}

TariffSolution solve_stochastic(const ProblemSpec& spec, const scenarios::ScenarioSet& set, const IpmOptions& options) {
  const Formulation f = formulate(spec, set);
  const IpmResult r = solve_ipm(f.qp, options);
  if (!r.x.allFinite() || !std::isfinite(r.eta)) {
    throw Error(ErrorCode::SolverFailure, "interior-point iterate diverged after " + std::to_string(r.iterations) +
                                              " iterations");
  }
  FirstStage x = decode(spec, f, r.x);
  const bool indexed = spec.price_regulation == PriceRegulation::Indexed;
  if (indexed && !price_band(spec).fixed()) project_day_means(spec, x.lambdaE);

  const auto T = static_cast<Eigen::Index>(spec.horizon);
  const auto W = static_cast<Eigen::Index>(set.size());
  TariffSolution sol;
  sol.price_regulation = spec.price_regulation;
  sol.chi = spec.chi;
  sol.alpha = spec.alpha;
  sol.lambdaE = x.lambdaE;
  sol.pB = x.pB;
  sol.pC_ppa = x.pC_ppa;
  sol.retail_price.resize(T, W);
  sol.demand.resize(T, W);
  sol.pool_purchase.resize(T, W);
  sol.ppa_delivered.resize(T, W);
  sol.profit_per_scenario.resize(W);
  sol.probabilities = set.probabilities();
  for (Eigen::Index w = 0; w < W; ++w) {
    const auto& sc = set.scenarios[static_cast<std::size_t>(w)];
    sol.retail_price.col(w) = retail_prices(spec, sc, x);
    sol.demand.col(w) = sc.beta * sol.retail_price.col(w) + spec.baseline_demand;
    sol.ppa_delivered.col(w) = sc.availability * x.pC_ppa;
    sol.pool_purchase.col(w) =
        sol.demand.col(w) - Eigen::VectorXd::Constant(T, x.pB) - sol.ppa_delivered.col(w);
    sol.profit_per_scenario[w] = profit(spec, sc, x);
  }
  sol.expected_profit = sol.probabilities.dot(sol.profit_per_scenario);
  const double guess = spec.chi > 0.0 ? r.eta : sol.expected_profit;
  const auto [cv, eta] = cvar_crossover(sol.profit_per_scenario, sol.probabilities, spec.alpha, guess);
  sol.cvar = cv;
  sol.eta = eta;
  sol.s = (Eigen::VectorXd::Constant(W, eta) - sol.profit_per_scenario).cwiseMax(0.0);
  sol.objective = (1.0 - spec.chi) * sol.expected_profit + spec.chi * sol.cvar;
  sol.report = {r.status, r.iterations, r.primal_residual, r.dual_residual, r.relative_gap};
  return sol;
}

TariffSolution solve_deterministic(const ProblemSpec& spec, const scenarios::Scenario& scenario,
                                   const IpmOptions& options) {
  scenarios::ScenarioSet set;
  set.scenarios.push_back(scenario);
  set.scenarios.front().probability = 1.0;
  ProblemSpec single = spec;
  single.chi = 0.0;
  return solve_stochastic(single, set, options);
}

TariffSolution solve_free_price(const ProblemSpec& spec, const scenarios::ScenarioSet& set, const IpmOptions& options) {
  ProblemSpec free = spec;
  free.price_regulation = PriceRegulation::Free;
  return solve_stochastic(free, set, options);
}

}  // namespace tariffopt::optimizer
