#pragma once

#include <cstdint>
#include <vector>

#include "tariffopt/regression.hpp"

namespace tariffopt::coeff {

// Normal approximation of the price coefficient's sampling distribution.
struct PriceCoeffDistribution {
  double mean = 0.0;
  double std = 0.0;
  double shift = 0.0;  // elasticity shift, applied as mean - shift
  bool truncate_at_zero = false;

  double shifted_mean() const { return mean - shift; }
  PriceCoeffDistribution with_shift(double s) const;
};

// Requires a design with a constant column so that the residual mean is zero.
PriceCoeffDistribution beta1_distribution(const regression::RegressionFit& fit,
                                          const regression::DesignMatrix& dm);

// Price row of (X'X)^-1 X', the weights that map demand to the price coefficient.
Eigen::VectorXd price_weights(const regression::DesignMatrix& dm);

// Draws mean - shift + std * z. Draws with the same seed share their z-scores,
// so changing only the shift moves every sample by the same amount.
// With truncation, non-negative draws are rejected and redrawn.
std::vector<double> sample_beta(const PriceCoeffDistribution& dist, std::size_t count, std::uint64_t seed);

enum class RowSampling {
  Bootstrap,  // n rows drawn with replacement
  Prefix,     // the first n rows
};

struct CltOptions {
  double noether_threshold = 0.05;
  double min_eigenvalue = 1e-8;
  RowSampling sampling = RowSampling::Bootstrap;
};

struct CltDiagnostic {
  std::vector<std::size_t> sample_sizes;
  std::vector<double> max_eigenvalues;
  std::vector<double> min_eigenvalues;
  std::vector<bool> rank_deficient;  // per size
  double noether_ratio = 0.0;
  bool pass = true;
  std::vector<std::string> failures;
};

CltDiagnostic clt_diagnostic(const regression::DesignMatrix& dm, const std::vector<std::size_t>& sizes,
                             std::uint64_t seed, const CltOptions& options = {});

}  // namespace tariffopt::coeff
