#pragma once

#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

#include "tariffopt/coeff_dist.hpp"
#include "tariffopt/data.hpp"
#include "tariffopt/optimizer.hpp"
#include "tariffopt/regression.hpp"
#include "tariffopt/scenario.hpp"

namespace tariffopt::io {

using Json = nlohmann::ordered_json;

// Reads a TOML or JSON document (by extension; ".json" is JSON, anything else
// TOML) into JSON. Throws IoError or InvalidConfig.
Json read_document(const std::filesystem::path& path);
Json parse_toml(std::string_view text);
void write_json(const std::filesystem::path& path, const Json& doc);

data::SplitSpec split_from_json(const Json& doc);
Json to_json(const data::SplitSpec& split);
data::SplitSpec read_split(const std::filesystem::path& path);

data::SynthConfig synth_from_json(const Json& doc);

// Missing keys keep ProblemSpec defaults. `baseline_demand` is an array of
// length horizon or a scalar level repeated over the horizon.
optimizer::ProblemSpec problem_from_json(const Json& doc);
Json to_json(const optimizer::ProblemSpec& spec);
optimizer::ProblemSpec read_problem_spec(const std::filesystem::path& path);

struct FitArtifact {
  regression::ModelKind kind = regression::ModelKind::Large;
  regression::FeatureTransform transform;
  // One fit, or one per slot of the day for the combined model.
  std::vector<regression::RegressionFit> fits;
  regression::FitMetrics metrics;
  // Present for single-equation models.
  std::optional<coeff::PriceCoeffDistribution> beta_distribution;
};

Json to_json(const FitArtifact& fit);
FitArtifact fit_from_json(const Json& doc);
void write_fit(const std::filesystem::path& path, const FitArtifact& fit);
FitArtifact read_fit(const std::filesystem::path& path);

inline constexpr int kScenarioFormatVersion = 1;

Json to_json(const scenarios::ScenarioSet& set);
scenarios::ScenarioSet scenarios_from_json(const Json& doc);
void write_scenarios(const std::filesystem::path& path, const scenarios::ScenarioSet& set);
scenarios::ScenarioSet read_scenarios(const std::filesystem::path& path);

Json to_json(const optimizer::TariffSolution& sol, bool per_scenario_detail = true);

}  // namespace tariffopt::io
