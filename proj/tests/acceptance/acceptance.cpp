#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include <tariffopt/coeff_dist.hpp>
#include <tariffopt/error.hpp>
#include <tariffopt/experiments.hpp>
#include <tariffopt/optimizer.hpp>
#include <tariffopt/regression.hpp>
#include <tariffopt/report.hpp>
#include <tariffopt/scenarios.hpp>

#include "fixtures.hpp"

using namespace tariffopt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Validator tallies shared with criterion 11.
struct ValidatorTally {
  int solutions = 0;
  int failures = 0;
  std::vector<std::string> messages;

  void add(const optimizer::ValidationReport& r, const std::string& label) {
    ++solutions;
    if (!r.ok) {
      ++failures;
      messages.push_back(label + ": " + (r.failures.empty() ? "?" : r.failures.front()));
    }
  }
  void add_batch(int solved, int failed, const std::vector<std::string>& msgs) {
    solutions += solved;
    failures += failed;
    messages.insert(messages.end(), msgs.begin(), msgs.end());
  }
};

ValidatorTally g_tally;

// ---------------------------------------------------------------------------

Outcome closed_form() {
  const auto t0 = Clock::now();
  optimizer::ProblemSpec spec;
  spec.horizon = 1;
  spec.slots_per_day = 1;
  spec.baseline_demand = Eigen::VectorXd::Constant(1, 10.0);
  spec.pB_max = 0.0;
  spec.ppa_max = 0.0;
  spec.price_regulation = optimizer::PriceRegulation::Free;
  scenarios::ScenarioSet set;
  set.scenarios.push_back({Eigen::VectorXd::Constant(1, 5.0), Eigen::VectorXd::Zero(1), -1.0, 1.0});
  const auto sol = optimizer::solve_free_price(spec, set);
  g_tally.add(optimizer::validate_solution(spec, set, sol), "closed form");
  const double elapsed = seconds_since(t0);

  // Stationarity of (lambda - 5)(10 - lambda): lambda = 7.5, profit 2.5 * 2.5 pence.
  const double price = sol.lambdaE[0];
  const double profit_pence = 100.0 * sol.expected_profit;
  const bool ok = std::abs(price - 7.5) <= 1e-6 && std::abs(profit_pence - 6.25) <= 1e-6 && elapsed < 1.0;
  return {ok, fmt("price %.9f (7.5), profit %.9f p (6.25), %.3f s", price, profit_pence, elapsed)};
}

// ---------------------------------------------------------------------------
// Exhaustive search for T = 4 (two days of two slots), two scenarios.

struct SmallInstance {
  optimizer::ProblemSpec spec;
  scenarios::ScenarioSet set;
};

SmallInstance random_small(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto U = [&](double a, double b) { return a + (b - a) * u(rng); };
  SmallInstance in;
  auto& s = in.spec;
  s.horizon = 4;
  s.slots_per_day = 2;
  s.lambdaE_bar = U(4.0, 8.0);
  s.gamma = U(0.02, 0.08);
  s.pB_max = U(5.0, 20.0);
  s.ppa_max = U(5.0, 20.0);
  s.alpha = U(0.5, 0.95);
  s.chi = std::floor(U(0.0, 5.0)) / 4.0;
  s.baseline_demand.resize(4);
  for (int t = 0; t < 4; ++t) s.baseline_demand[t] = U(20.0, 60.0);
  double mean_pool = 0.0;
  const double p1 = U(0.2, 0.8);
  for (int w = 0; w < 2; ++w) {
    scenarios::Scenario sc;
    sc.pool.resize(4);
    sc.availability.resize(4);
    for (int t = 0; t < 4; ++t) {
      sc.pool[t] = U(3.0, 15.0);
      sc.availability[t] = U(0.0, 1.0);
    }
    sc.beta = U(-3.0, -0.5);
    sc.probability = w == 0 ? p1 : 1.0 - p1;
    mean_pool += sc.probability * sc.pool.mean();
    in.set.scenarios.push_back(sc);
  }
  s.pB_price = mean_pool + U(-1.5, 1.5);
  s.ppa_price = mean_pool + U(-1.5, 1.5);
  return in;
}

// Profit contributions in pence from first principles.
struct OracleParts {
  double price[2][2];  // [scenario][day] price-dependent part at a grid offset
};

double price_part(const SmallInstance& in, int w, int day, double offset) {
  const auto& sc = in.set.scenarios[w];
  double total = 0.0;
  for (int k = 0; k < 2; ++k) {
    const int t = 2 * day + k;
    const double lambdaE = in.spec.lambdaE_bar + (k == 0 ? offset : -offset);
    const double retail = lambdaE + sc.pool[t] - in.spec.lambdaE_bar;
    const double demand = in.spec.baseline_demand[t] + sc.beta * retail;
    total += retail * demand - sc.pool[t] * demand;
  }
  return total;
}

double contract_gain_B(const SmallInstance& in, int w) {
  const auto& sc = in.set.scenarios[w];
  double g = 0.0;
  for (int t = 0; t < 4; ++t) g += sc.pool[t] - in.spec.pB_price;
  return g;
}

double contract_gain_C(const SmallInstance& in, int w) {
  const auto& sc = in.set.scenarios[w];
  double g = 0.0;
  for (int t = 0; t < 4; ++t) g += sc.availability[t] * (sc.pool[t] - in.spec.ppa_price);
  return g;
}

double objective_of(const SmallInstance& in, double P0, double P1) {
  const double pi0 = in.set.scenarios[0].probability, pi1 = in.set.scenarios[1].probability;
  Eigen::Vector2d p(P0, P1), pi(pi0, pi1);
  return (1.0 - in.spec.chi) * (pi0 * P0 + pi1 * P1) + in.spec.chi * fixtures::cvar_enumerated(p, pi, in.spec.alpha);
}

// Best objective over the contract box for fixed price parts (pence). The
// objective is concave piecewise linear in the contracts with a single kink
// where the two scenario profits coincide, so the maximum lies on a box
// corner or where that kink line crosses a box edge.
double best_over_contracts(const SmallInstance& in, double F0, double F1, const double gB[2], const double gC[2]) {
  const double bmax = in.spec.pB_max, cmax = in.spec.ppa_max;
  double best = -std::numeric_limits<double>::infinity();
  auto eval = [&](double b, double c) {
    best = std::max(best, objective_of(in, F0 + gB[0] * b + gC[0] * c, F1 + gB[1] * b + gC[1] * c));
  };
  eval(0, 0);
  eval(bmax, 0);
  eval(0, cmax);
  eval(bmax, cmax);
  const double dF = F0 - F1, dB = gB[0] - gB[1], dC = gC[0] - gC[1];
  for (double b : {0.0, bmax}) {
    if (dC != 0.0) {
      const double c = -(dF + dB * b) / dC;
      if (c >= 0.0 && c <= cmax) eval(b, c);
    }
  }
  for (double c : {0.0, cmax}) {
    if (dB != 0.0) {
      const double b = -(dF + dC * c) / dB;
      if (b >= 0.0 && b <= bmax) eval(b, c);
    }
  }
  return best;
}

double grid_search(const SmallInstance& in) {
  const double half = in.spec.gamma * in.spec.lambdaE_bar;
  const double step = 1e-3;
  std::vector<double> offsets;
  for (int k = 0;; ++k) {
    const double o = -half + k * step;
    if (o > half) break;
    offsets.push_back(o);
  }
  offsets.push_back(half);
  const std::size_t n = offsets.size();
  std::vector<double> day0[2], day1[2];
  for (int w = 0; w < 2; ++w) {
    day0[w].resize(n);
    day1[w].resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      day0[w][i] = price_part(in, w, 0, offsets[i]);
      day1[w][i] = price_part(in, w, 1, offsets[i]);
    }
  }
  const double gB[2] = {contract_gain_B(in, 0), contract_gain_B(in, 1)};
  const double gC[2] = {contract_gain_C(in, 0), contract_gain_C(in, 1)};
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      best = std::max(best, best_over_contracts(in, day0[0][i] + day1[0][j], day0[1][i] + day1[1][j], gB, gC));
    }
  }
  return best / 100.0;
}

// Objective of a first-stage point evaluated by the oracle's own formulas.
double oracle_objective(const SmallInstance& in, const optimizer::FirstStage& x) {
  double P[2];
  for (int w = 0; w < 2; ++w) {
    const auto& sc = in.set.scenarios[w];
    double total = 0.0;
    for (int t = 0; t < 4; ++t) {
      const double retail = x.lambdaE[t] + sc.pool[t] - in.spec.lambdaE_bar;
      const double demand = in.spec.baseline_demand[t] + sc.beta * retail;
      const double ppa = sc.availability[t] * x.pC_ppa;
      total += retail * demand - sc.pool[t] * (demand - x.pB - ppa) - in.spec.pB_price * x.pB -
               in.spec.ppa_price * ppa;
    }
    P[w] = total;
  }
  return objective_of(in, P[0], P[1]) / 100.0;
}

Outcome grid_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  int band_active = 0, contract_active = 0;
  for (int i = 0; i < 20; ++i) {
    const auto in = random_small(rng);
    const auto sol = optimizer::solve_stochastic(in.spec, in.set);
    g_tally.add(optimizer::validate_solution(in.spec, in.set, sol), "grid instance " + std::to_string(i));
    const double grid = grid_search(in);
    const double solver = oracle_objective(in, sol.first_stage());
    worst = std::max(worst, std::abs(solver - grid));
    const double lo = (1.0 - in.spec.gamma) * in.spec.lambdaE_bar, hi = (1.0 + in.spec.gamma) * in.spec.lambdaE_bar;
    bool band = false;
    for (int t = 0; t < 4; ++t) band |= sol.lambdaE[t] - lo < 1e-6 || hi - sol.lambdaE[t] < 1e-6;
    band_active += band;
    const double fb = sol.pB / in.spec.pB_max, fc = sol.pC_ppa / in.spec.ppa_max;
    contract_active += (fb < 1e-6 || fb > 1 - 1e-6) || (fc < 1e-6 || fc > 1 - 1e-6);
  }
  const double elapsed = seconds_since(t0);
  const bool ok = worst <= 1e-2 && elapsed < 60.0;
  return {ok, fmt("max |solver - grid| = %.3e GBP over 20 instances (band active in %d, contract bound in %d), %.1f s",
                  worst, band_active, contract_active, elapsed)};
}

// ---------------------------------------------------------------------------

Outcome cvar_enumeration() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    const int n = 1 + static_cast<int>(u(rng) * 10.0) % 10;
    Eigen::VectorXd profits(n), probs(n);
    for (int w = 0; w < n; ++w) {
      profits[w] = -50.0 + 100.0 * u(rng);
      probs[w] = 0.05 + u(rng);
    }
    if (i % 7 == 0 && n > 2) profits[1] = profits[0];
    probs /= probs.sum();
    const double alpha = 0.5 + 0.49 * u(rng);

    // The profits enter the solver as constants of a risk-only program.
    optimizer::ScenarioQp qp;
    qp.lower = Eigen::VectorXd::Zero(1);
    qp.upper = Eigen::VectorXd::Ones(1);
    qp.A.resize(0, 1);
    qp.b.resize(0);
    for (int w = 0; w < n; ++w) qp.profits.push_back({profits[w], Eigen::VectorXd::Zero(1), Eigen::VectorXd::Zero(1)});
    qp.probabilities = probs;
    qp.chi = 1.0;
    qp.alpha = alpha;
    const auto r = optimizer::solve_ipm(qp);
    const double oracle = fixtures::cvar_enumerated(profits, probs, alpha);
    worst = std::max(worst, std::abs(r.objective - oracle));
  }
  const double elapsed = seconds_since(t0);
  const bool ok = worst <= 1e-8 && elapsed < 5.0;
  return {ok, fmt("max |solver cvar - enumeration| = %.3e over 100 vectors, %.2f s", worst, elapsed)};
}

// ---------------------------------------------------------------------------

Outcome frontier_monotone() {
  const auto t0 = Clock::now();
  const auto set = fixtures::synthetic_set(7, 20, 11);
  const auto spec = fixtures::synthetic_spec(7);
  const auto fr = experiments::efficient_frontier(spec, set, experiments::chi_grid(0.1));
  g_tally.add_batch(static_cast<int>(fr.points.size()), fr.validator_failures, fr.failures);
  const double elapsed = seconds_since(t0);
  const bool ok = fr.points.size() == 11 && fr.monotone(1e-5) && elapsed < 600.0;
  return {ok, fmt("T=%d, profit violation %.2e, cvar violation %.2e, E[profit] %.4f -> %.4f, CVaR %.4f -> %.4f, %.1f s",
                  static_cast<int>(spec.horizon), fr.profit_violation, fr.cvar_violation,
                  fr.points.front().expected_profit, fr.points.back().expected_profit, fr.points.front().cvar,
                  fr.points.back().cvar, elapsed)};
}

// ---------------------------------------------------------------------------

Outcome contract_structure() {
  const auto set = fixtures::synthetic_set(2, 20, 5);
  auto spec = fixtures::synthetic_spec(2);
  double threshold_B = 0.0, num_C = 0.0, den_C = 0.0;
  for (const auto& sc : set.scenarios) {
    threshold_B += sc.probability * sc.pool.mean();
    num_C += sc.probability * sc.availability.dot(sc.pool);
    den_C += sc.probability * sc.availability.sum();
  }
  const double threshold_C = num_C / den_C;
  const std::vector<double> dB = {-1.0, -0.3, -0.005, 0.005, 0.3};
  const std::vector<double> dC = {-0.5, -0.005, 0.005, 0.3, 1.0};
  std::vector<double> pB_prices, ppa_prices;
  for (double d : dB) pB_prices.push_back(threshold_B + d);
  for (double d : dC) ppa_prices.push_back(threshold_C + d);
  const auto grid = experiments::contract_grid(spec, set, pB_prices, ppa_prices, 0.0);
  g_tally.add_batch(static_cast<int>(grid.cells.size()), grid.validator_failures, grid.failures);

  constexpr double kBang = 1e-6;
  double spread = 0.0, off_vertex = 0.0;
  std::vector<int> row_state;
  for (std::size_t i = 0; i < pB_prices.size(); ++i) {
    double lo = 1.0, hi = 0.0;
    for (std::size_t j = 0; j < ppa_prices.size(); ++j) {
      const double f = grid.at(i, j).pB_fraction;
      lo = std::min(lo, f);
      hi = std::max(hi, f);
      off_vertex = std::max(off_vertex, std::min(f, 1.0 - f));
      off_vertex = std::max(off_vertex, std::min(grid.at(i, j).ppa_fraction, 1.0 - grid.at(i, j).ppa_fraction));
    }
    spread = std::max(spread, hi - lo);
    row_state.push_back(grid.at(i, 0).pB_fraction > 0.5 ? 1 : 0);
  }
  // Full below the threshold, empty above; the switch brackets the oracle.
  const bool switch_ok = row_state == std::vector<int>{1, 1, 1, 0, 0};
  bool ppa_switch = true;
  for (std::size_t j = 0; j < ppa_prices.size(); ++j) {
    ppa_switch &= (grid.at(0, j).ppa_fraction > 0.5) == (j < 2);
  }
  const double bracket = pB_prices[3] - pB_prices[2];
  const double estimate = 0.5 * (pB_prices[2] + pB_prices[3]);
  const bool ok = spread <= kBang && off_vertex <= kBang && switch_ok && ppa_switch &&
                  std::abs(estimate - threshold_B) + 0.5 * bracket <= 0.01;
  return {ok, fmt("oracle thresholds B %.4f / PPA %.4f p/kWh, switch bracket width %.3f, pB spread along PPA axis "
                  "%.1e, max distance from {0,1} %.1e",
                  threshold_B, threshold_C, bracket, spread, off_vertex)};
}

// ---------------------------------------------------------------------------

Outcome beta_sampling() {
  auto cfg = data::SynthConfig::defaults();
  cfg.days = 60;
  const auto series = data::synthesize(cfg, 3);
  const data::SplitSpec split{{cfg.start, cfg.start + std::chrono::days(39)},
                              {cfg.start + std::chrono::days(40), cfg.start + std::chrono::days(49)},
                              {cfg.start + std::chrono::days(50), cfg.start + std::chrono::days(59)}};
  const auto design = regression::build_features(series, regression::FeatureSpec::small(), split);
  const auto fit = regression::fit_ols(design.train);
  const auto dist = coeff::beta1_distribution(fit, design.train);
  const std::size_t n = 100000;
  const auto draws = coeff::sample_beta(dist, n, 9);
  double mean = 0.0;
  for (double b : draws) mean += b;
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double b : draws) ss += (b - mean) * (b - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const double se = dist.std / std::sqrt(static_cast<double>(n));
  const bool mean_ok = std::abs(mean - dist.mean) <= 3.0 * se;
  const bool sd_ok = std::abs(sd / dist.std - 1.0) <= 0.01;

  // Orthonormal design: (X'X)^-1 = I, so the variance is sigma^2 itself.
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(0.0, 1.0);
  const Eigen::Index rows = 400, cols = 5;
  Eigen::MatrixXd M(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    M(i, 0) = 1.0;
    for (Eigen::Index j = 1; j < cols; ++j) M(i, j) = z(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
  const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
  regression::DesignMatrix dm;
  dm.X = Q;
  dm.y.resize(rows);
  for (Eigen::Index i = 0; i < rows; ++i) dm.y[i] = 3.0 * Q(i, 0) - 2.0 * Q(i, 2) + 0.5 * z(rng);
  dm.column_names = {"intercept", "a", "price", "b", "c"};
  dm.price_index = 2;
  const auto ofit = regression::fit_ols(dm);
  const auto odist = coeff::beta1_distribution(ofit, dm);
  const Eigen::VectorXd resid = dm.y - Q * (Q.transpose() * dm.y);
  const double sigma2 = resid.squaredNorm() / static_cast<double>(rows - cols);
  const double ortho_err = std::abs(odist.std * odist.std - sigma2);
  const bool ok = mean_ok && sd_ok && ortho_err <= 1e-10;
  return {ok, fmt("mean %.6f vs %.6f (3se %.2e), sd ratio %.5f, orthonormal |var - sigma2| %.2e", mean, dist.mean,
                  3.0 * se, sd / dist.std, ortho_err)};
}

// ---------------------------------------------------------------------------

Outcome planted_recovery() {
  auto cfg = data::SynthConfig::defaults();
  cfg.days = 100;
  const double planted = cfg.coefficients.at("price");
  const data::SplitSpec split{{cfg.start, cfg.start + std::chrono::days(69)},
                              {cfg.start + std::chrono::days(70), cfg.start + std::chrono::days(84)},
                              {cfg.start + std::chrono::days(85), cfg.start + std::chrono::days(99)}};
  const int reps = 200;
  int covered = 0;
  for (int r = 0; r < reps; ++r) {
    const auto series = data::synthesize(cfg, 1000 + static_cast<std::uint64_t>(r));
    const auto design = regression::build_features(series, regression::FeatureSpec::large(), split);
    const auto fit = regression::fit_ols(design.train);
    const double b = fit.price_coefficient();
    const double se = fit.standard_errors[fit.price_index];
    covered += std::abs(b - planted) <= 1.96 * se;
  }
  const double rate = 100.0 * covered / reps;
  return {std::abs(rate - 95.0) <= 5.0, fmt("95%% CI covered the planted %.2f in %.1f%% of %d runs", planted, rate, reps)};
}

// ---------------------------------------------------------------------------

Outcome reduction_fidelity() {
  const auto set = fixtures::synthetic_set(1, 300, 21);
  const auto spec = fixtures::synthetic_spec(1);
  const auto raw_f = scenarios::deterministic_objectives(spec, set);
  const auto reduced = scenarios::reduce_with_objectives(set, raw_f, std::nullopt);
  std::vector<double> red_f, red_p;
  for (std::size_t k = 0; k < reduced.size(); ++k) {
    red_f.push_back(raw_f[static_cast<std::size_t>(reduced.representatives[k])]);
    red_p.push_back(reduced.scenarios[k].probability);
  }
  const std::vector<double> raw_p(set.size(), 1.0 / static_cast<double>(set.size()));
  const double w1 = scenarios::wasserstein1(raw_f, raw_p, red_f, red_p);
  double sum = 0.0;
  for (double p : red_p) sum += p;
  const auto raw_sum = set.probabilities().sum();
  const bool partition_ok = std::abs(sum - raw_sum) <= 1e-12 && std::abs(sum - 1.0) <= 1e-12;

  // Two well-separated pool price regimes.
  scenarios::ScenarioSet two;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> jitter(0.0, 0.02);
  for (int w = 0; w < 40; ++w) {
    scenarios::Scenario sc;
    sc.pool = Eigen::VectorXd::Constant(kSlotsPerDay, w % 2 == 0 ? 6.0 : 18.0);
    for (Eigen::Index t = 0; t < sc.pool.size(); ++t) sc.pool[t] += jitter(rng);
    sc.availability = Eigen::VectorXd::Constant(kSlotsPerDay, 0.3);
    sc.beta = -2.0;
    sc.probability = 1.0 / 40.0;
    two.scenarios.push_back(sc);
  }
  const auto two_red = scenarios::reduce(two, spec);
  const bool two_ok = two_red.size() == 2 && std::abs(two_red.scenarios[0].probability - 0.5) <= 1e-12 &&
                      std::abs(two_red.scenarios[1].probability - 0.5) <= 1e-12;
  const bool ok = w1 <= reduced.bandwidth && partition_ok && two_ok;
  return {ok, fmt("%zu -> %zu scenarios, W1 %.4f <= h %.4f, |sum pi - 1| %.1e, two-regime K=%zu pi=%.3f/%.3f",
                  set.size(), reduced.size(), w1, reduced.bandwidth, std::abs(sum - 1.0), two_red.size(),
                  two_red.size() > 0 ? two_red.scenarios[0].probability : 0.0,
                  two_red.size() > 1 ? two_red.scenarios[1].probability : 0.0)};
}

// ---------------------------------------------------------------------------

double mean_path_error(const std::vector<Eigen::VectorXd>& paths, const Eigen::VectorXd& actual) {
  const Eigen::Index days = actual.size() / kSlotsPerDay;
  double total = 0.0;
  for (const auto& p : paths) {
    for (Eigen::Index d = 0; d < days; ++d) {
      total += (p.segment(d * kSlotsPerDay, kSlotsPerDay) - actual.segment(d * kSlotsPerDay, kSlotsPerDay)).norm();
    }
  }
  return total / static_cast<double>(paths.size() * static_cast<std::size_t>(days));
}

Outcome sampler_vs_uniform() {
  const auto split = fixtures::library_split();
  const auto dates = fixtures::horizon_dates(make_date(2016, 11, 1), 28);
  int wins = 0;
  double worst_ratio = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto lib = scenarios::synthesize_library(scenarios::PathRole::Pool, {}, seed);
    const auto actual = lib.horizon_path(dates);
    const auto dists = scenarios::fit_date_distributions(lib, split);
    const double e_sampled = mean_path_error(scenarios::sample_paths(lib, dists, dates, 100, seed), actual);
    const double e_uniform = mean_path_error(scenarios::sample_uniform_paths(lib, split, dates, 100, seed), actual);
    wins += e_sampled < e_uniform;
    worst_ratio = std::max(worst_ratio, e_sampled / e_uniform);
  }
  return {wins == 10, fmt("sampler beat uniform in %d/10 seeds, worst error ratio %.3f", wins, worst_ratio)};
}

// ---------------------------------------------------------------------------

Outcome beta_shift() {
  const auto set = fixtures::synthetic_set(2, 20, 31);
  const coeff::PriceCoeffDistribution dist{-2.0, 0.3, 0.0, true};
  const std::vector<double> shifts = {0, 1, 2, 4, 8};
  const auto spec = fixtures::synthetic_spec(2);
  const auto indexed =
      experiments::beta_shift_sweep(spec, set, dist, shifts, 0.0, optimizer::PriceRegulation::Indexed, 5);
  const auto free =
      experiments::beta_shift_sweep(spec, set, dist, shifts, 0.0, optimizer::PriceRegulation::Free, 5);
  g_tally.add_batch(static_cast<int>(indexed.points.size()), indexed.validator_failures, indexed.failures);
  g_tally.add_batch(static_cast<int>(free.points.size()), free.validator_failures, free.failures);
  double drift = 0.0;
  for (const auto& p : indexed.points) {
    drift = std::max(drift, std::abs(p.average_price - indexed.points.front().average_price));
  }
  bool decreasing = free.points.size() == shifts.size();
  for (std::size_t i = 1; i < free.points.size(); ++i) {
    decreasing &= free.points[i].average_price < free.points[i - 1].average_price;
  }
  std::string prices;
  for (const auto& p : free.points) prices += fmt(" %.4f", p.average_price);
  const bool ok = indexed.points.size() == shifts.size() && drift <= 1e-6 && decreasing;
  return {ok, fmt("indexed drift %.2e p/kWh, free prices%s", drift, prices.c_str())};
}

// ---------------------------------------------------------------------------

Outcome validator() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 12; ++i) {
    const auto reg = i % 2 == 0 ? optimizer::PriceRegulation::Indexed : optimizer::PriceRegulation::Free;
    const auto set = fixtures::synthetic_set(1 + i % 2, 8 + static_cast<std::size_t>(i), 200 + static_cast<std::uint64_t>(i));
    auto spec = fixtures::synthetic_spec(1 + i % 2, reg);
    spec.chi = std::round(u(rng) * 10.0) / 10.0;
    spec.alpha = 0.8 + 0.15 * u(rng);
    spec.pB_price = 10.0 + 6.0 * u(rng);
    spec.ppa_price = 10.0 + 6.0 * u(rng);
    const auto sol = optimizer::solve_stochastic(spec, set);
    g_tally.add(optimizer::validate_solution(spec, set, sol), "random solve " + std::to_string(i));
  }
  const bool ok = g_tally.failures == 0 && g_tally.solutions > 0;
  std::string detail = fmt("%d solutions re-verified, %d failures", g_tally.solutions, g_tally.failures);
  if (!g_tally.messages.empty()) detail += "; first: " + g_tally.messages.front();
  return {ok, detail};
}

// ---------------------------------------------------------------------------

std::vector<std::string> run_pipeline(const fs::path& dir, std::uint64_t seed, unsigned threads) {
  const auto raw = fixtures::synthetic_set(2, 40, seed);
  auto spec = fixtures::synthetic_spec(2);
  experiments::SolveSettings settings;
  settings.threads = threads;
  const auto raw_f = scenarios::deterministic_objectives(spec, raw);
  const auto set = scenarios::reduce_with_objectives(raw, raw_f, std::nullopt);
  const auto red_f = scenarios::deterministic_objectives(spec, set);

  report::ReportInputs in;
  in.seed = seed;
  in.config = "synthetic 2-day pipeline";
  in.frontier = experiments::efficient_frontier(spec, set, experiments::chi_grid(0.25), settings);
  in.grid = experiments::contract_grid(spec, set, {12.0, 13.0, 14.0}, {12.0, 13.0, 14.0}, 0.5, settings);
  const coeff::PriceCoeffDistribution dist{-2.0, 0.3, 0.0, true};
  in.sweeps.push_back(experiments::beta_shift_sweep(spec, set, dist, {0, 2}, 0.0, optimizer::PriceRegulation::Indexed,
                                                    seed, settings));
  in.sweeps.push_back(
      experiments::beta_shift_sweep(spec, set, dist, {0, 2}, 0.0, optimizer::PriceRegulation::Free, seed, settings));
  for (double chi : {0.0, 1.0}) {
    spec.chi = chi;
    const auto sol = optimizer::solve_stochastic(spec, set);
    in.profit_cdfs.push_back({fmt("chi=%.1f", chi), sol.profit_per_scenario, sol.probabilities});
    if (chi == 0.0) in.price_bands = experiments::price_bands(spec, sol);
  }
  in.raw_objectives = report::ProfitDistribution{
      "raw", Eigen::Map<const Eigen::VectorXd>(raw_f.data(), static_cast<Eigen::Index>(raw_f.size())),
      raw.probabilities()};
  in.reduced_objectives = report::ProfitDistribution{
      "reduced", Eigen::Map<const Eigen::VectorXd>(red_f.data(), static_cast<Eigen::Index>(red_f.size())),
      set.probabilities()};
  return report::write_report(dir, in);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const auto base = fs::temp_directory_path() / ("tariffopt_determinism_" + std::to_string(::getpid()));
  fs::remove_all(base);
  const auto a = run_pipeline(base / "a", 17, 1);
  const auto b = run_pipeline(base / "b", 17, 0);
  int differing = 0;
  for (const auto& name : a) differing += slurp(base / "a" / name) != slurp(base / "b" / name);
  const bool ok = a == b && differing == 0 && !a.empty();
  fs::remove_all(base);
  return {ok, fmt("%zu files per run, %d differ", a.size(), differing)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"closed-form free-price oracle", closed_form},
      {"exhaustive grid oracle", grid_oracle},
      {"CVaR enumeration oracle", cvar_enumeration},
      {"efficient-frontier monotonicity", frontier_monotone},
      {"risk-neutral contract structure", contract_structure},
      {"price-coefficient sampling", beta_sampling},
      {"planted-coefficient recovery", planted_recovery},
      {"scenario reduction fidelity", reduction_fidelity},
      {"date sampler vs uniform", sampler_vs_uniform},
      {"beta-shift behaviour", beta_shift},
      {"solution validator", validator},
      {"report determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %zu (%s): %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
