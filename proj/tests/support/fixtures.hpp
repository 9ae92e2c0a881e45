#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <tariffopt/coeff_dist.hpp>
#include <tariffopt/optimizer.hpp>
#include <tariffopt/scenarios.hpp>

namespace fixtures {

using namespace tariffopt;

inline data::SplitSpec library_split() {
  return {{make_date(2015, 1, 1), make_date(2015, 12, 31)},
          {make_date(2016, 1, 1), make_date(2016, 6, 30)},
          {make_date(2016, 7, 1), make_date(2016, 12, 31)}};
}

inline std::vector<Date> horizon_dates(Date first, int days) {
  std::vector<Date> out;
  for (int d = 0; d < days; ++d) out.push_back(first + std::chrono::days(d));
  return out;
}

inline Eigen::VectorXd baseline(int horizon, double level = 100.0, double amplitude = 25.0) {
  Eigen::VectorXd b(horizon);
  for (int t = 0; t < horizon; ++t) {
    const double phase = 2.0 * std::numbers::pi * (t % kSlotsPerDay) / kSlotsPerDay;
    b[t] = level - amplitude * std::cos(phase);
  }
  return b;
}

// Pool and solar paths resampled from seasonal synthetic libraries, betas
// from a normal price-coefficient distribution.
inline scenarios::ScenarioSet synthetic_set(int days, std::size_t count, std::uint64_t seed,
                                            coeff::PriceCoeffDistribution dist = {-2.0, 0.3, 0.0, true}) {
  scenarios::SeasonalLibraryConfig cfg;
  cfg.first = make_date(2012, 1, 1);
  cfg.last = make_date(2018, 12, 31);
  const auto pool = scenarios::synthesize_library(scenarios::PathRole::Pool, cfg, seed);
  const auto solar = scenarios::synthesize_library(scenarios::PathRole::Solar, cfg, seed + 1);
  const auto split = library_split();
  const auto dates = horizon_dates(make_date(2016, 12, 1), days);
  const auto pool_paths =
      scenarios::sample_paths(pool, scenarios::fit_date_distributions(pool, split), dates, count, seed);
  const auto solar_paths =
      scenarios::sample_paths(solar, scenarios::fit_date_distributions(solar, split), dates, count, seed);
  const auto betas = coeff::sample_beta(dist, count, seed);
  return scenarios::assemble(pool_paths, solar_paths, betas, Timestamp::from_date_slot(dates.front(), 0));
}

inline optimizer::ProblemSpec synthetic_spec(int days, optimizer::PriceRegulation reg = optimizer::PriceRegulation::Indexed) {
  optimizer::ProblemSpec spec;
  spec.horizon = days * kSlotsPerDay;
  spec.start = Timestamp::from_date_slot(make_date(2016, 12, 1), 0);
  spec.lambdaE_bar = 4.0;
  spec.gamma = 0.25;
  spec.pB_price = 14.0;
  spec.ppa_price = 13.5;
  spec.baseline_demand = baseline(spec.horizon);
  spec.price_regulation = reg;
  return spec;
}

// Independent CVaR by enumerating eta over the profit values.
inline double cvar_enumerated(const Eigen::VectorXd& p, const Eigen::VectorXd& pi, double alpha) {
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    double tail = 0.0;
    for (Eigen::Index w = 0; w < p.size(); ++w) tail += pi[w] * std::max(0.0, p[k] - p[w]);
    best = std::max(best, p[k] - tail / (1.0 - alpha));
  }
  return best;
}

}  // namespace fixtures
