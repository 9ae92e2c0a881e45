#include "tariffopt/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tariffopt/error.hpp"
#include "tariffopt/parallel.hpp"

namespace tariffopt::experiments {

namespace {

void record(const optimizer::ValidationReport& v, const std::string& label, int& count,
            std::vector<std::string>& failures) {
  if (v.ok) return;
  ++count;
  for (const auto& f : v.failures) failures.push_back(label + ": " + f);
}

std::string label_of(const char* name, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%.6g", name, v);
  return buf;
}

}  // namespace

std::vector<double> chi_grid(double step) {
  if (!(step > 0.0 && step <= 1.0)) throw Error(ErrorCode::InvalidConfig, "chi step must lie in (0,1]");
  std::vector<double> out;
  const int n = static_cast<int>(std::round(1.0 / step));
  for (int i = 0; i <= n; ++i) out.push_back(std::min(1.0, i * step));
  if (out.back() < 1.0) out.push_back(1.0);
  return out;
}

FrontierResult efficient_frontier(const optimizer::ProblemSpec& spec, const scenarios::ScenarioSet& set,
                                  std::vector<double> chis, const SolveSettings& settings) {
  if (chis.empty()) throw Error(ErrorCode::InvalidConfig, "no chi values");
  std::sort(chis.begin(), chis.end());
  chis.erase(std::unique(chis.begin(), chis.end()), chis.end());
  std::vector<optimizer::TariffSolution> sols(chis.size());
  std::vector<optimizer::ValidationReport> checks(chis.size());
  parallel_for(
      chis.size(),
      [&](std::size_t i) {
        auto s = spec;
        s.chi = chis[i];
        sols[i] = optimizer::solve_stochastic(s, set, settings.solver);
        checks[i] = optimizer::validate_solution(s, set, sols[i]);
      },
      settings.threads);
  FrontierResult out;
  for (std::size_t i = 0; i < chis.size(); ++i) {
    out.points.push_back({chis[i], sols[i].expected_profit, sols[i].cvar});
    record(checks[i], label_of("chi", chis[i]), out.validator_failures, out.failures);
    if (sols[i].report.status != optimizer::SolveStatus::Optimal) {
      out.failures.push_back(label_of("chi", chis[i]) + ": solver stopped at the iteration limit");
    }
  }
  for (std::size_t i = 1; i < out.points.size(); ++i) {
    const auto& a = out.points[i - 1];
    const auto& b = out.points[i];
    out.profit_violation =
        std::max(out.profit_violation, (b.expected_profit - a.expected_profit) / std::max(1.0, std::abs(a.expected_profit)));
    out.cvar_violation = std::max(out.cvar_violation, (a.cvar - b.cvar) / std::max(1.0, std::abs(a.cvar)));
  }
  return out;
}

double average_price(const optimizer::TariffSolution& solution, const scenarios::ScenarioSet& set) {
  const auto T = solution.retail_price.rows();
  if (T == 0 || solution.retail_price.cols() != static_cast<Eigen::Index>(set.size())) {
    throw Error(ErrorCode::LengthMismatch, "solution does not match the scenario set");
  }
  return (solution.retail_price * set.probabilities()).sum() / static_cast<double>(T);
}

GridResult contract_grid(const optimizer::ProblemSpec& spec, const scenarios::ScenarioSet& set,
                         const std::vector<double>& pB_prices, const std::vector<double>& ppa_prices, double chi,
                         const SolveSettings& settings) {
  if (pB_prices.empty() || ppa_prices.empty()) throw Error(ErrorCode::InvalidConfig, "empty price grid");
  GridResult out;
  out.chi = chi;
  out.pB_prices = pB_prices;
  out.ppa_prices = ppa_prices;
  const auto cells = pB_prices.size() * ppa_prices.size();
  out.cells.resize(cells);
  std::vector<optimizer::ValidationReport> checks(cells);
  parallel_for(
      cells,
      [&](std::size_t c) {
        auto s = spec;
        s.chi = chi;
        s.pB_price = pB_prices[c / ppa_prices.size()];
        s.ppa_price = ppa_prices[c % ppa_prices.size()];
        const auto sol = optimizer::solve_stochastic(s, set, settings.solver);
        out.cells[c] = {s.pB_price, s.ppa_price, s.pB_max > 0.0 ? sol.pB / s.pB_max : 0.0,
                        s.ppa_max > 0.0 ? sol.pC_ppa / s.ppa_max : 0.0};
        checks[c] = optimizer::validate_solution(s, set, sol);
      },
      settings.threads);
  for (std::size_t c = 0; c < cells; ++c) {
    record(checks[c], label_of("pB", out.cells[c].pB_price) + " " + label_of("ppa", out.cells[c].ppa_price),
           out.validator_failures, out.failures);
  }
  return out;
}

Quantiles weighted_quantiles(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  if (values.size() == 0 || values.size() != weights.size()) {
    throw Error(ErrorCode::LengthMismatch, "values and weights must be non-empty and equal in length");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  const double total = weights.sum();
  auto q = [&](double level) {
    double cum = 0.0;
    for (auto i : order) {
      cum += weights[i];
      if (cum >= level * total * (1.0 - 1e-12)) return values[i];
    }
    return values[order.back()];
  };
  return {values[order.front()], q(0.10), q(0.25), q(0.5), q(0.75), q(0.90), values[order.back()]};
}

SweepResult beta_shift_sweep(const optimizer::ProblemSpec& spec, const scenarios::ScenarioSet& set,
                             const coeff::PriceCoeffDistribution& dist, const std::vector<double>& shifts, double chi,
                             optimizer::PriceRegulation regulation, std::uint64_t seed, const SolveSettings& settings) {
  if (shifts.empty()) throw Error(ErrorCode::InvalidConfig, "no beta shifts");
  set.validate();
  SweepResult out;
  out.regulation = regulation;
  out.chi = chi;
  for (const auto& sc : set.scenarios) out.mean_pool_price += sc.probability * sc.pool.mean();
  out.points.resize(shifts.size());
  std::vector<optimizer::ValidationReport> checks(shifts.size());
  parallel_for(
      shifts.size(),
      [&](std::size_t i) {
        const auto betas = coeff::sample_beta(dist.with_shift(shifts[i]), set.size(), seed);
        auto shifted = set;
        for (std::size_t w = 0; w < set.size(); ++w) shifted.scenarios[w].beta = betas[w];
        auto s = spec;
        s.chi = chi;
        s.price_regulation = regulation;
        const auto sol = optimizer::solve_stochastic(s, shifted, settings.solver);
        auto& p = out.points[i];
        p.beta_shift = shifts[i];
        p.average_price = average_price(sol, shifted);
        p.expected_profit = sol.expected_profit;
        p.cvar = sol.cvar;
        p.profit = weighted_quantiles(sol.profit_per_scenario, sol.probabilities);
        p.reasonable_price = p.average_price <= 2.0 * out.mean_pool_price;
        checks[i] = optimizer::validate_solution(s, shifted, sol);
      },
      settings.threads);
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    record(checks[i], label_of("shift", shifts[i]), out.validator_failures, out.failures);
  }
  return out;
}

PriceBands price_bands(const optimizer::ProblemSpec& spec, const optimizer::TariffSolution& solution) {
  PriceBands out;
  out.by_weekday = spec.start.has_value();
  std::array<std::array<double, kSlotsPerDay>, 7> weight{};
  for (auto& row : out.low) row.fill(std::numeric_limits<double>::infinity());
  for (auto& row : out.high) row.fill(-std::numeric_limits<double>::infinity());
  const auto& R = solution.retail_price;
  for (Eigen::Index t = 0; t < R.rows(); ++t) {
    std::size_t day = 0, slot = static_cast<std::size_t>(t % kSlotsPerDay);
    if (spec.start) {
      const auto ts = spec.start->plus_slots(t);
      day = static_cast<std::size_t>(weekday_index(ts.date()));
      slot = static_cast<std::size_t>(ts.slot_of_day());
    }
    out.present[day] = true;
    for (Eigen::Index w = 0; w < R.cols(); ++w) {
      const double p = solution.probabilities[w];
      out.mean[day][slot] += p * R(t, w);
      weight[day][slot] += p;
      out.low[day][slot] = std::min(out.low[day][slot], R(t, w));
      out.high[day][slot] = std::max(out.high[day][slot], R(t, w));
    }
  }
  for (std::size_t d = 0; d < 7; ++d) {
    for (std::size_t s = 0; s < kSlotsPerDay; ++s) {
      if (weight[d][s] > 0.0) {
        out.mean[d][s] /= weight[d][s];
      } else {
        out.low[d][s] = out.high[d][s] = out.mean[d][s] = 0.0;
      }
    }
  }
  return out;
}

std::vector<std::pair<double, double>> weighted_ecdf(const Eigen::VectorXd& values, const Eigen::VectorXd& weights) {
  if (values.size() == 0 || values.size() != weights.size()) {
    throw Error(ErrorCode::LengthMismatch, "values and weights must be non-empty and equal in length");
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
  const double total = weights.sum();
  std::vector<std::pair<double, double>> out;
  double cum = 0.0;
  for (auto i : order) {
    cum += weights[i];
    if (!out.empty() && out.back().first == values[i]) {
      out.back().second = cum / total;
    } else {
      out.emplace_back(values[i], cum / total);
    }
  }
  out.back().second = 1.0;
  return out;
}

}  // namespace tariffopt::experiments
