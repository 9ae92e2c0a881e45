#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace tariffopt::optimizer {

// Scenario profit P(x) = k + g'x + 0.5 * sum_i h_i x_i^2 with h <= 0.
struct QuadProfit {
  double k = 0.0;
  Eigen::VectorXd g;
  Eigen::VectorXd h;

  double operator()(const Eigen::VectorXd& x) const;
};

// maximize (1-chi) sum_w pi_w P_w(x) + chi * (eta - kappa * sum_w pi_w s_w)
//   s.t.   s_w + P_w(x) - eta >= 0,  s >= 0,  lower <= x <= upper,  A x = b
// The CVaR block (eta, s) is present only when chi > 0.
struct ScenarioQp {
  Eigen::VectorXd lower;  // -inf / +inf for free variables
  Eigen::VectorXd upper;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  std::vector<QuadProfit> profits;
  Eigen::VectorXd probabilities;
  double chi = 0.0;
  double alpha = 0.9;
  // Optional starting point for x; the box midpoint (or zero) otherwise.
  Eigen::VectorXd x0;

  Eigen::Index variables() const { return lower.size(); }
  double kappa() const { return 1.0 / (1.0 - alpha); }
};

enum class SolveStatus { Optimal, MaxIterations };

std::string to_string(SolveStatus s);

struct IpmOptions {
  double feasibility_tol = 1e-8;
  double gap_tol = 1e-7;
  int max_iterations = 200;
  double step_fraction = 0.995;
};

struct IpmResult {
  SolveStatus status = SolveStatus::MaxIterations;
  Eigen::VectorXd x;
  double eta = 0.0;
  Eigen::VectorXd s;
  Eigen::VectorXd z;  // multipliers of the CVaR rows
  Eigen::VectorXd nu;  // multipliers of A x = b
  double objective = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double relative_gap = 0.0;
};

IpmResult solve_ipm(const ScenarioQp& qp, const IpmOptions& options = {});

// Exact CVaR of fixed profits by vertex search from a starting guess for eta.
// Returns {cvar, eta}.
std::pair<double, double> cvar_crossover(const Eigen::VectorXd& profits, const Eigen::VectorXd& probs,
                                         double alpha, double eta_guess);

}  // namespace tariffopt::optimizer
