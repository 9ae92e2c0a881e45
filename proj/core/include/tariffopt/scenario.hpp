#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "tariffopt/calendar.hpp"

namespace tariffopt::scenarios {

// One joint realization. Prices in p/kWh, beta in kWh per p/kWh.
struct Scenario {
  Eigen::VectorXd pool;
  Eigen::VectorXd availability;
  double beta = 0.0;
  double probability = 0.0;
};

enum class Provenance { Raw, Reduced };

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  Provenance provenance = Provenance::Raw;
  // For reduced sets: cluster index of every raw scenario.
  std::vector<int> cluster_map;
  // For reduced sets: raw index each representative was taken from.
  std::vector<int> representatives;
  std::optional<Timestamp> start;
  double bandwidth = 0.0;

  std::size_t size() const { return scenarios.size(); }
  Eigen::Index horizon() const { return scenarios.empty() ? 0 : scenarios.front().pool.size(); }
  Eigen::VectorXd probabilities() const;
  // Throws LengthMismatch or InvalidConfig when a scenario breaks the set invariants.
  void validate(double probability_tolerance = 1e-12) const;
};

std::string to_string(Provenance p);

}  // namespace tariffopt::scenarios
