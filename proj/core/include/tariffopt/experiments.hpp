#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "tariffopt/coeff_dist.hpp"
#include "tariffopt/optimizer.hpp"
#include "tariffopt/scenario.hpp"

namespace tariffopt::experiments {

struct SolveSettings {
  optimizer::IpmOptions solver;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct FrontierPoint {
  double chi = 0.0;
  double expected_profit = 0.0;  // pounds
  double cvar = 0.0;
};

struct FrontierResult {
  std::vector<FrontierPoint> points;
  // Largest relative increase of expected profit and decrease of CVaR between
  // consecutive chi values; zero for a monotone frontier.
  double profit_violation = 0.0;
  double cvar_violation = 0.0;
  int validator_failures = 0;
  std::vector<std::string> failures;

  bool monotone(double tolerance = 1e-5) const {
    return profit_violation <= tolerance && cvar_violation <= tolerance;
  }
};

std::vector<double> chi_grid(double step = 0.1);

FrontierResult efficient_frontier(const optimizer::ProblemSpec& spec, const scenarios::ScenarioSet& set,
                                  std::vector<double> chis, const SolveSettings& settings = {});

// Probability-weighted mean retail price over the horizon (p/kWh).
double average_price(const optimizer::TariffSolution& solution, const scenarios::ScenarioSet& set);

struct GridCell {
  double pB_price = 0.0;
  double ppa_price = 0.0;
  double pB_fraction = 0.0;
  double ppa_fraction = 0.0;
};

struct GridResult {
  double chi = 0.0;
  std::vector<double> pB_prices;
  std::vector<double> ppa_prices;
  std::vector<GridCell> cells;  // pB price major, PPA price minor
  int validator_failures = 0;
  std::vector<std::string> failures;

  const GridCell& at(std::size_t i_pB, std::size_t j_ppa) const { return cells[i_pB * ppa_prices.size() + j_ppa]; }
};

GridResult contract_grid(const optimizer::ProblemSpec& spec, const scenarios::ScenarioSet& set,
                         const std::vector<double>& pB_prices, const std::vector<double>& ppa_prices, double chi,
                         const SolveSettings& settings = {});

// Weighted quantile summary used for violin-style plots.
struct Quantiles {
  double min = 0.0, q10 = 0.0, q25 = 0.0, median = 0.0, q75 = 0.0, q90 = 0.0, max = 0.0;
};

Quantiles weighted_quantiles(const Eigen::VectorXd& values, const Eigen::VectorXd& weights);

struct ShiftSweepPoint {
  double beta_shift = 0.0;
  double average_price = 0.0;  // p/kWh
  double expected_profit = 0.0;
  double cvar = 0.0;
  Quantiles profit;
  bool reasonable_price = true;  // average price at most twice the mean pool price
};

struct SweepResult {
  optimizer::PriceRegulation regulation = optimizer::PriceRegulation::Indexed;
  double chi = 0.0;
  double mean_pool_price = 0.0;
  std::vector<ShiftSweepPoint> points;
  int validator_failures = 0;
  std::vector<std::string> failures;
};

// Replaces every scenario's beta with a draw from dist.with_shift(shift), using
// the same seed for every shift, and re-solves.
SweepResult beta_shift_sweep(const optimizer::ProblemSpec& spec, const scenarios::ScenarioSet& set,
                             const coeff::PriceCoeffDistribution& dist, const std::vector<double>& shifts, double chi,
                             optimizer::PriceRegulation regulation, std::uint64_t seed,
                             const SolveSettings& settings = {});

// Probability-weighted pooled mean retail price per (weekday, slot). Without a
// start timestamp every day is pooled into row 0.
struct PriceBands {
  bool by_weekday = false;
  std::array<std::array<double, kSlotsPerDay>, 7> mean{};
  std::array<std::array<double, kSlotsPerDay>, 7> low{};
  std::array<std::array<double, kSlotsPerDay>, 7> high{};
  std::array<bool, 7> present{};
};

PriceBands price_bands(const optimizer::ProblemSpec& spec, const optimizer::TariffSolution& solution);

// Weighted ECDF points (value, cumulative probability), ascending.
std::vector<std::pair<double, double>> weighted_ecdf(const Eigen::VectorXd& values, const Eigen::VectorXd& weights);

}  // namespace tariffopt::experiments
