#include "tariffopt/spline.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tariffopt/error.hpp"

namespace tariffopt::regression {

SplineTrend::SplineTrend(double t0, double t1, int knots, Eigen::VectorXd coefficients,
                         double clamp_low, double clamp_high)
    : t0_(t0), t1_(t1), knots_(knots), coef_(std::move(coefficients)),
      clamp_low_(clamp_low), clamp_high_(clamp_high) {
  if (knots_ < 2 || coef_.size() != knots_ + 2 || !(t1_ > t0_)) {
    throw Error(ErrorCode::DegenerateKnots, "inconsistent serialized spline");
  }
}

Eigen::VectorXd SplineTrend::basis(double time) const {
  const double u = (time - t0_) / (t1_ - t0_);
  Eigen::VectorXd b(knots_ + 2);
  b[0] = 1.0;
  b[1] = u;
  b[2] = u * u;
  b[3] = u * u * u;
  for (int j = 1; j <= knots_ - 2; ++j) {
    const double kappa = static_cast<double>(j) / (knots_ - 1);
    const double d = std::max(0.0, u - kappa);
    b[3 + j] = d * d * d;
  }
  return b;
}

SplineTrend SplineTrend::fit(std::span<const double> times, std::span<const double> values, int knots) {
  if (knots < 2) throw Error(ErrorCode::DegenerateKnots, "need at least 2 knots");
  if (times.size() != values.size() || times.empty()) {
    throw Error(ErrorCode::DegenerateKnots, "times and values must be non-empty and aligned");
  }
  const std::set<double> distinct(times.begin(), times.end());
  const auto basis_size = static_cast<std::size_t>(knots + 2);
  if (distinct.size() < basis_size) {
    throw Error(ErrorCode::DegenerateKnots, "span has " + std::to_string(distinct.size()) +
                                                " distinct points, need " + std::to_string(basis_size));
  }
  SplineTrend s;
  s.t0_ = *distinct.begin();
  s.t1_ = *distinct.rbegin();
  s.knots_ = knots;
  s.coef_ = Eigen::VectorXd::Zero(knots + 2);

  Eigen::MatrixXd B(static_cast<Eigen::Index>(times.size()), knots + 2);
  Eigen::VectorXd y(static_cast<Eigen::Index>(times.size()));
  for (std::size_t i = 0; i < times.size(); ++i) {
    B.row(static_cast<Eigen::Index>(i)) = s.basis(times[i]).transpose();
    y[static_cast<Eigen::Index>(i)] = values[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(B);
  if (qr.rank() < knots + 2) throw Error(ErrorCode::DegenerateKnots, "knot placement leaves empty pieces");
  s.coef_ = qr.solve(y);

  const Eigen::VectorXd fitted = B * s.coef_;
  const double lo = fitted.minCoeff();
  const double hi = fitted.maxCoeff();
  const double pad = 0.2 * (hi - lo);
  s.clamp_low_ = lo - pad;
  s.clamp_high_ = hi + pad;
  return s;
}

double SplineTrend::unclamped(double time) const { return basis(time).dot(coef_); }

double SplineTrend::operator()(double time) const {
  const double v = unclamped(time);
  if (time >= t0_ && time <= t1_) return v;
  return std::clamp(v, clamp_low_, clamp_high_);
}

}  // namespace tariffopt::regression
