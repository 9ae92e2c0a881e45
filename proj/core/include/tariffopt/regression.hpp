#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tariffopt/data.hpp"
#include "tariffopt/features.hpp"
#include "tariffopt/spline.hpp"

namespace tariffopt::regression {

enum class ModelKind { Small, Large, Combined };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view text);

struct FeatureSpec {
  ModelKind model_kind = ModelKind::Large;
  std::vector<int> lag_offsets;
  int spline_knots = 0;  // 0 disables the annual trend column
  bool include_interactions = true;
  bool include_price = true;

  static FeatureSpec small();
  static FeatureSpec large();
  static FeatureSpec combined();
  static FeatureSpec for_kind(ModelKind kind);

  void validate() const;
  // Largest look-back over all columns; rows before it are dropped.
  int required_history() const;
};

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;  // sample standard deviation (n-1); 0 for the intercept
  int ddof = 1;
};

struct DesignMatrix {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> column_names;
  std::vector<Timestamp> row_times;
  Standardization standardization;
  // -1 when the design has no price column (price ablation).
  Eigen::Index price_index = -1;

  Eigen::Index rows() const { return X.rows(); }
  Eigen::Index cols() const { return X.cols(); }
  DesignMatrix select_rows(const std::vector<Eigen::Index>& rows) const;
};

// Column group labels ("month", "month:demand_lags", ...) in first-seen order.
std::vector<std::string> feature_groups(const DesignMatrix& dm);

// Everything learned from the training rows that is needed to lay out the
// same columns for later rows: month levels, centering for interactions,
// the trend spline and any columns dropped for being constant.
struct FeatureTransform {
  FeatureSpec spec;
  std::vector<unsigned> month_levels;  // months with a dummy (first training month is the baseline)
  std::map<std::string, double> centers;
  std::optional<SplineTrend> spline;
  Timestamp time_origin;
  std::vector<std::string> column_names;
};

struct SplitDesign {
  FeatureTransform transform;
  DesignMatrix train;
  DesignMatrix validation;
  DesignMatrix test;
};

SplitDesign build_features(const data::MeterSeries& series, const FeatureSpec& spec,
                           const data::SplitSpec& split);

// Lays out rows [first_row, last_row] (record indices) with a fitted transform.
// Rows without enough history are skipped. Standardization is computed on
// the returned rows.
DesignMatrix apply_transform(const data::MeterSeries& series, const FeatureTransform& transform,
                             std::size_t first_row, std::size_t last_row);
// All rows of the series with enough history.
DesignMatrix apply_transform(const data::MeterSeries& series, const FeatureTransform& transform);

SplineTrend fit_spline(const data::MeterSeries& series, int knots);
// Days since `origin` as a real number; the time axis of the trend spline.
double trend_time(Timestamp t, Timestamp origin);

struct RegressionFit {
  Eigen::VectorXd beta;
  Eigen::VectorXd residuals;
  double sigma2_eps = 0.0;  // residual variance with n-k denominator
  Eigen::Index price_index = -1;
  std::vector<std::string> column_names;
  Standardization standardization;
  Eigen::VectorXd standard_errors;
  Eigen::Index rows = 0;
  double condition_number = 0.0;
  double r2_train = 0.0;

  double price_coefficient() const { return beta[price_index]; }
  Eigen::VectorXd predict(const DesignMatrix& dm) const;
  // Demand with the price contribution removed: the baseline the tariff
  // optimizer treats as price independent.
  Eigen::VectorXd baseline(const DesignMatrix& dm) const;
};

inline constexpr double kMaxConditionNumber = 1e10;

RegressionFit fit_ols(const DesignMatrix& dm);

struct FitMetrics {
  double mae_train = 0.0;
  double rmse_train = 0.0;
  double mae_test = 0.0;
  double rmse_test = 0.0;
  double r2 = 0.0;  // training set
  double r2_test = 0.0;
};

struct ErrorStats {
  double mae = 0.0;
  double rmse = 0.0;
  double r2 = 0.0;
};

ErrorStats error_stats(const Eigen::VectorXd& y, const Eigen::VectorXd& predicted);

FitMetrics evaluate(const RegressionFit& fit, const DesignMatrix& dm_test);

// Relative weight (percent) of the standardized price coefficient among all
// standardized non-intercept coefficients.
double standardized_price_impact(const RegressionFit& fit);

struct CombinedFit {
  std::array<RegressionFit, kSlotsPerDay> slots;

  Eigen::VectorXd predict(const DesignMatrix& dm) const;
};

CombinedFit fit_combined(const DesignMatrix& train);
CombinedFit fit_combined(const data::MeterSeries& series, const FeatureSpec& spec,
                         const data::SplitSpec& split);
FitMetrics evaluate(const CombinedFit& fit, const DesignMatrix& dm_train, const DesignMatrix& dm_test);

struct AblationResult {
  FitMetrics with_price;
  FitMetrics without_price;

  double delta_rmse_train() const { return without_price.rmse_train - with_price.rmse_train; }
  double delta_mae_train() const { return without_price.mae_train - with_price.mae_train; }
  double delta_rmse_test() const { return without_price.rmse_test - with_price.rmse_test; }
  double delta_mae_test() const { return without_price.mae_test - with_price.mae_test; }
};

AblationResult ablate_price(const data::MeterSeries& series, const FeatureSpec& spec,
                            const data::SplitSpec& split);

}  // namespace tariffopt::regression
