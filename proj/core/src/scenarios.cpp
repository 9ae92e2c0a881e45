#include "tariffopt/scenarios.hpp"

#include <cmath>

#include "tariffopt/error.hpp"
#include "tariffopt/parallel.hpp"

namespace tariffopt::scenarios {

std::string to_string(Provenance p) { return p == Provenance::Raw ? "raw" : "reduced"; }

Eigen::VectorXd ScenarioSet::probabilities() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(scenarios.size()));
  for (std::size_t i = 0; i < scenarios.size(); ++i) p[static_cast<Eigen::Index>(i)] = scenarios[i].probability;
  return p;
}

void ScenarioSet::validate(double probability_tolerance) const {
  if (scenarios.empty()) throw Error(ErrorCode::InvalidConfig, "scenario set is empty");
  const auto T = horizon();
  double total = 0.0;
  for (std::size_t i = 0; i < scenarios.size(); ++i) {
    const auto& s = scenarios[i];
    const auto where = "scenario " + std::to_string(i);
    if (s.pool.size() != T || s.availability.size() != T) {
      throw Error(ErrorCode::LengthMismatch, where + " has a path of the wrong length");
    }
    if (!s.pool.allFinite()) throw Error(ErrorCode::InvalidConfig, where + ": non-finite pool price");
    if ((s.availability.array() < 0.0).any() || (s.availability.array() > 1.0).any()) {
      throw Error(ErrorCode::InvalidConfig, where + ": availability outside [0,1]");
    }
    if (!std::isfinite(s.beta)) throw Error(ErrorCode::InvalidConfig, where + ": non-finite beta");
    if (!(s.probability >= 0.0)) throw Error(ErrorCode::InvalidConfig, where + ": negative probability");
    total += s.probability;
  }
  if (!(std::abs(total - 1.0) <= probability_tolerance)) {
    throw Error(ErrorCode::InvalidConfig, "scenario probabilities sum to " + std::to_string(total));
  }
}

ScenarioSet assemble(const std::vector<Eigen::VectorXd>& pool_paths, const std::vector<Eigen::VectorXd>& solar_paths,
                     const std::vector<double>& betas, std::optional<Timestamp> start) {
  const auto n = pool_paths.size();
  if (n == 0) throw Error(ErrorCode::LengthMismatch, "no scenarios to assemble");
  if (solar_paths.size() != n || betas.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "got " + std::to_string(n) + " pool paths, " +
                                               std::to_string(solar_paths.size()) + " solar paths and " +
                                               std::to_string(betas.size()) + " betas");
  }
  ScenarioSet set;
  set.start = start;
  for (std::size_t i = 0; i < n; ++i) {
    if (pool_paths[i].size() != pool_paths[0].size() || solar_paths[i].size() != pool_paths[0].size()) {
      throw Error(ErrorCode::LengthMismatch, "scenario " + std::to_string(i) + " paths differ in length");
    }
    set.scenarios.push_back({pool_paths[i], solar_paths[i], betas[i], 1.0 / static_cast<double>(n)});
  }
  return set;
}

std::vector<double> deterministic_objectives(const optimizer::ProblemSpec& spec, const ScenarioSet& set,
                                             const optimizer::IpmOptions& solver) {
  std::vector<double> f(set.size());
  parallel_for(set.size(), [&](std::size_t i) {
    try {
      const auto sol = optimizer::solve_deterministic(spec, set.scenarios[i], solver);
      if (sol.report.status != optimizer::SolveStatus::Optimal) {
        throw Error(ErrorCode::SolverFailure, "did not converge in " + std::to_string(sol.report.iterations) +
                                                  " iterations");
      }
      f[i] = sol.objective;
    } catch (const Error& e) {
      throw Error(ErrorCode::SolverFailure, "scenario " + std::to_string(i) + ": " + e.what());
    }
  });
  return f;
}

ScenarioSet reduce_with_objectives(const ScenarioSet& set, std::span<const double> objectives,
                                   std::optional<double> bandwidth) {
  set.validate();
  if (objectives.size() != set.size()) throw Error(ErrorCode::LengthMismatch, "one objective per scenario is required");
  if (!bandwidth && set.provenance == Provenance::Reduced && set.bandwidth > 0.0) bandwidth = set.bandwidth;
  std::vector<double> weights(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) weights[i] = set.scenarios[i].probability;
  const auto r = reduce_by_objective(objectives, weights, bandwidth);

  ScenarioSet out;
  out.provenance = Provenance::Reduced;
  out.start = set.start;
  out.bandwidth = r.bandwidth;
  const bool nested = set.provenance == Provenance::Reduced && !set.cluster_map.empty();
  for (std::size_t k = 0; k < r.representatives.size(); ++k) {
    auto sc = set.scenarios[static_cast<std::size_t>(r.representatives[k])];
    sc.probability = r.probabilities[k];
    out.scenarios.push_back(std::move(sc));
    const int rep = r.representatives[k];
    out.representatives.push_back(nested && set.representatives.size() == set.size()
                                      ? set.representatives[static_cast<std::size_t>(rep)]
                                      : rep);
  }
  if (nested) {
    for (int c : set.cluster_map) out.cluster_map.push_back(r.labels[static_cast<std::size_t>(c)]);
  } else {
    out.cluster_map = r.labels;
  }
  return out;
}

ScenarioSet reduce(const ScenarioSet& set, const optimizer::ProblemSpec& spec, const ReduceOptions& options) {
  const auto f = deterministic_objectives(spec, set, options.solver);
  return reduce_with_objectives(set, f, options.bandwidth);
}

}  // namespace tariffopt::scenarios
