#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace tariffopt::regression {

// Least-squares cubic regression spline (truncated power basis) with
// equally spaced knots over the fitted span, boundary knots included.
// Outside the span the first/last cubic piece is continued and then
// clamped to the fitted range widened by 20% on either side.
class SplineTrend {
 public:
  SplineTrend() = default;

  static SplineTrend fit(std::span<const double> times, std::span<const double> values, int knots);
  // Rebuilds a fitted trend from serialized parts.
  SplineTrend(double t0, double t1, int knots, Eigen::VectorXd coefficients, double clamp_low,
              double clamp_high);

  double operator()(double time) const;
  double unclamped(double time) const;

  double span_begin() const { return t0_; }
  double span_end() const { return t1_; }
  int knots() const { return knots_; }
  const Eigen::VectorXd& coefficients() const { return coef_; }
  double clamp_low() const { return clamp_low_; }
  double clamp_high() const { return clamp_high_; }
  bool fitted() const { return coef_.size() > 0; }

 private:
  Eigen::VectorXd basis(double time) const;

  double t0_ = 0.0;
  double t1_ = 1.0;
  int knots_ = 0;
  Eigen::VectorXd coef_;
  double clamp_low_ = 0.0;
  double clamp_high_ = 0.0;
};

}  // namespace tariffopt::regression
