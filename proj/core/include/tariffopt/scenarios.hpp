#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "tariffopt/coeff_dist.hpp"
#include "tariffopt/data.hpp"
#include "tariffopt/optimizer.hpp"
#include "tariffopt/rng.hpp"
#include "tariffopt/scenario.hpp"

namespace tariffopt::scenarios {

enum class PathRole { Pool, Solar };

std::string to_string(PathRole role);

// Historical daily paths, one per calendar date, always at half-hourly resolution.
class PathLibrary {
 public:
  explicit PathLibrary(PathRole role = PathRole::Pool) : role_(role) {}

  // CSV with `timestamp,value`. A date with 24 on-the-hour rows is upsampled by
  // repeating each hour; a date with 48 rows is taken as is.
  static PathLibrary from_csv(const std::filesystem::path& path, PathRole role);
  static PathLibrary parse_csv(std::string_view text, PathRole role);
  std::string to_csv() const;

  void add(Date date, Eigen::VectorXd path);
  const Eigen::VectorXd* find(Date date) const;
  std::vector<Date> dates() const;
  std::size_t size() const { return paths_.size(); }
  PathRole role() const { return role_; }
  // Concatenated paths for consecutive dates; throws NoPathInRange when one is missing.
  Eigen::VectorXd horizon_path(std::span<const Date> dates) const;

 private:
  PathRole role_;
  std::map<Date, Eigen::VectorXd> paths_;
};

struct SeasonalLibraryConfig {
  Date first = make_date(2010, 1, 1);
  Date last = make_date(2019, 12, 31);
  double mean = 13.6;            // pool: p/kWh
  double annual_amplitude = 3.0;
  double daily_amplitude = 4.0;
  double day_noise = 1.0;        // per-day level shock
  double slot_noise = 0.5;
  bool hourly = true;            // pool prices come at hourly resolution
};

// Seasonal synthetic history: annual and daily sinusoids plus noise. Solar
// paths follow a daylight bell scaled by a random daily clearness in [0,1].
PathLibrary synthesize_library(PathRole role, const SeasonalLibraryConfig& config, std::uint64_t seed);

// Empirical pmfs over signed offsets. A day offset of k means the comparison
// date lies k days earlier in the year than the target; a year offset of k
// means it lies k years earlier.
struct DateDistanceDistributions {
  std::map<int, double> day_offset;
  std::map<int, double> year_offset;
};

inline constexpr int kNearestDates = 3;
inline constexpr int kFallbackDays = 7;

// Training dates are library dates inside split.train; the comparison set is
// every library date in a year that the split does not touch.
std::vector<Date> comparison_dates(const PathLibrary& lib, const data::SplitSpec& split);

DateDistanceDistributions fit_date_distributions(const PathLibrary& lib, const data::SplitSpec& split);

// Date displaced by the given offsets (Feb 29 maps to Feb 28 in common years).
Date displace(Date target, int day_offset, int year_offset);

// `count` horizon paths over `target_dates`, each date drawn independently.
std::vector<Eigen::VectorXd> sample_paths(const PathLibrary& lib, const DateDistanceDistributions& dists,
                                          std::span<const Date> target_dates, std::size_t count,
                                          std::uint64_t seed);

// Baseline sampler: each target date replaced by a uniformly drawn comparison date.
std::vector<Eigen::VectorXd> sample_uniform_paths(const PathLibrary& lib, const data::SplitSpec& split,
                                                  std::span<const Date> target_dates, std::size_t count,
                                                  std::uint64_t seed);

ScenarioSet assemble(const std::vector<Eigen::VectorXd>& pool_paths,
                     const std::vector<Eigen::VectorXd>& solar_paths, const std::vector<double>& betas,
                     std::optional<Timestamp> start = std::nullopt);

// Silverman's rule with a flat-kernel scale: 0.9 * min(sd, IQR/1.34) * n^(-1/5).
double silverman_bandwidth(std::span<const double> values, std::span<const double> weights);

struct ReductionResult {
  double bandwidth = 0.0;
  std::vector<double> modes;           // per cluster, ascending
  std::vector<int> labels;             // cluster of every input value
  std::vector<int> representatives;    // input index per cluster
  std::vector<double> probabilities;   // per cluster
};

// Weighted 1-D flat-kernel mean shift over objective values. Clusters are
// ordered by representative value, and no two representatives lie within the
// bandwidth of each other.
ReductionResult reduce_by_objective(std::span<const double> values, std::span<const double> weights,
                                    std::optional<double> bandwidth = std::nullopt);

struct ReduceOptions {
  std::optional<double> bandwidth;
  optimizer::IpmOptions solver;
};

// Deterministic objective of every scenario (risk neutral, single scenario).
std::vector<double> deterministic_objectives(const optimizer::ProblemSpec& spec, const ScenarioSet& set,
                                             const optimizer::IpmOptions& solver = {});

ScenarioSet reduce(const ScenarioSet& set, const optimizer::ProblemSpec& spec, const ReduceOptions& options = {});
ScenarioSet reduce_with_objectives(const ScenarioSet& set, std::span<const double> objectives,
                                   std::optional<double> bandwidth);

// Weighted empirical CDF distance between two discrete distributions.
double wasserstein1(std::span<const double> a, std::span<const double> wa, std::span<const double> b,
                    std::span<const double> wb);

}  // namespace tariffopt::scenarios
