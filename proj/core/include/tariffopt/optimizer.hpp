#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "tariffopt/interior_point.hpp"
#include "tariffopt/scenario.hpp"

namespace tariffopt::optimizer {

enum class PriceRegulation {
  Indexed,  // retail price = variable part + (pool - mean variable part), banded
  Free,     // retail price is a free per-slot decision
};

std::string to_string(PriceRegulation r);
PriceRegulation parse_price_regulation(std::string_view text);

// Prices in p/kWh, energy in kWh per slot.
struct ProblemSpec {
  int horizon = 0;
  int slots_per_day = kSlotsPerDay;
  std::optional<Timestamp> start;
  double lambdaE_bar = 1.0;
  double gamma = 0.25;
  double pB_price = 4.6;
  double pB_max = 80.0;
  double ppa_price = 4.8;
  double ppa_max = 80.0;
  double alpha = 0.9;
  double chi = 0.0;
  Eigen::VectorXd baseline_demand;
  PriceRegulation price_regulation = PriceRegulation::Indexed;

  int days() const { return horizon / slots_per_day; }
  // Throws InvalidConfig on broken invariants.
  void validate() const;
};

// First-stage decisions in project units.
struct FirstStage {
  Eigen::VectorXd lambdaE;  // variable price part, or the retail price itself when Free
  double pB = 0.0;
  double pC_ppa = 0.0;
};

struct SolverReport {
  SolveStatus status = SolveStatus::Optimal;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
};

// Monetary results in pounds; per-slot arrays are T x scenarios.
struct TariffSolution {
  PriceRegulation price_regulation = PriceRegulation::Indexed;
  double chi = 0.0;
  double alpha = 0.9;
  Eigen::VectorXd lambdaE;
  double pB = 0.0;
  double pC_ppa = 0.0;
  double eta = 0.0;
  Eigen::VectorXd s;
  Eigen::MatrixXd retail_price;
  Eigen::MatrixXd demand;
  Eigen::MatrixXd pool_purchase;
  Eigen::MatrixXd ppa_delivered;
  Eigen::VectorXd profit_per_scenario;
  Eigen::VectorXd probabilities;
  double expected_profit = 0.0;
  double cvar = 0.0;
  double objective = 0.0;
  SolverReport report;

  FirstStage first_stage() const { return {lambdaE, pB, pC_ppa}; }
};

// Retail price of one scenario at a first-stage point (p/kWh).
Eigen::VectorXd retail_prices(const ProblemSpec& spec, const scenarios::Scenario& scenario, const FirstStage& x);

// Profit in pounds: revenue minus pool, forward and PPA costs with the second
// stage eliminated through demand and balance equations.
double profit(const ProblemSpec& spec, const scenarios::Scenario& scenario, const FirstStage& x);

struct CvarResult {
  double cvar = 0.0;
  double var = 0.0;
};

// Full scan over the candidate set {profits}.
CvarResult cvar(const Eigen::VectorXd& profits, const Eigen::VectorXd& probs, double alpha);

TariffSolution solve_deterministic(const ProblemSpec& spec, const scenarios::Scenario& scenario,
                                   const IpmOptions& options = {});
TariffSolution solve_stochastic(const ProblemSpec& spec, const scenarios::ScenarioSet& set,
                                const IpmOptions& options = {});
// solve_stochastic with the regulation forced to Free.
TariffSolution solve_free_price(const ProblemSpec& spec, const scenarios::ScenarioSet& set,
                                const IpmOptions& options = {});

// The reduced quadratic program behind a solve, exposed for tests and benchmarks.
struct Formulation {
  ScenarioQp qp;
  // Positions of the free decisions inside qp.x; -1 when the decision is fixed.
  std::vector<Eigen::Index> price_var;
  Eigen::Index pB_var = -1;
  Eigen::Index pC_var = -1;
  FirstStage fixed;  // values used for fixed decisions
};

Formulation formulate(const ProblemSpec& spec, const scenarios::ScenarioSet& set);
FirstStage decode(const ProblemSpec& spec, const Formulation& f, const Eigen::VectorXd& x);

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> failures;
};

// Re-derives every solution invariant from the raw inputs.
ValidationReport validate_solution(const ProblemSpec& spec, const scenarios::ScenarioSet& set,
                                   const TariffSolution& sol, double tolerance = 1e-8);

}  // namespace tariffopt::optimizer
