#include "tariffopt/coeff_dist.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tariffopt/error.hpp"
#include "tariffopt/rng.hpp"

namespace tariffopt::coeff {

namespace {

bool has_constant_column(const Eigen::MatrixXd& X) {
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    if (X.rows() == 0) return false;
    const double lo = X.col(j).minCoeff(), hi = X.col(j).maxCoeff();
    const double scale = std::max(std::abs(lo), std::abs(hi));
    if (scale > 0.0 && hi - lo <= 1e-12 * scale) return true;
  }
  return false;
}

struct PriceSolve {
  Eigen::VectorXd c;  // (X'X)^-1 e_p
  double diag = 0.0;  // [(X'X)^-1]_pp
};

PriceSolve solve_price(const regression::DesignMatrix& dm) {
  const auto p = dm.price_index;
  if (p < 0 || p >= dm.cols()) throw Error(ErrorCode::InvalidConfig, "design has no price column");
  const auto k = dm.cols();
  if (dm.rows() < k) throw Error(ErrorCode::RankDeficient, "fewer rows than columns");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.X);
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R);
  const auto& sv = svd.singularValues();
  if (!(sv[k - 1] > 0.0 && sv[0] / sv[k - 1] <= regression::kMaxConditionNumber)) {
    throw Error(ErrorCode::RankDeficient, "design is numerically rank deficient");
  }
  // X P = Q R, so (X'X)^-1 = P R^-1 R^-T P'.
  const auto& perm = qr.colsPermutation();
  Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
  e[p] = 1.0;
  Eigen::VectorXd u = perm.transpose() * e;
  u = R.transpose().triangularView<Eigen::Lower>().solve(u);
  PriceSolve out;
  out.diag = u.squaredNorm();
  u = R.triangularView<Eigen::Upper>().solve(u);
  out.c = perm * u;
  return out;
}

}  // namespace

PriceCoeffDistribution PriceCoeffDistribution::with_shift(double s) const {
  if (!(s >= 0.0)) throw Error(ErrorCode::InvalidConfig, "beta shift must be >= 0");
  auto out = *this;
  out.shift = s;
  return out;
}

PriceCoeffDistribution beta1_distribution(const regression::RegressionFit& fit, const regression::DesignMatrix& dm) {
  if (fit.column_names != dm.column_names) {
    throw Error(ErrorCode::SchemaMismatch, "fit and design have different columns");
  }
  if (fit.price_index != dm.price_index) throw Error(ErrorCode::SchemaMismatch, "price column index differs");
  if (!has_constant_column(dm.X)) {
    throw Error(ErrorCode::InvalidConfig, "intercept-free designs are not supported");
  }
  const auto solve = solve_price(dm);
  PriceCoeffDistribution d;
  d.mean = fit.price_coefficient();
  d.std = std::sqrt(fit.sigma2_eps * solve.diag);
  return d;
}

Eigen::VectorXd price_weights(const regression::DesignMatrix& dm) { return dm.X * solve_price(dm).c; }

std::vector<double> sample_beta(const PriceCoeffDistribution& dist, std::size_t count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorCode::InvalidConfig, "count must be >= 1");
  if (!(dist.std >= 0.0)) throw Error(ErrorCode::InvalidConfig, "std must be >= 0");
  auto rng = make_rng(seed, RngStream::BetaSampling);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> out(count);
  const double m = dist.shifted_mean();
  constexpr int kMaxRejections = 1000000;
  for (auto& b : out) {
    b = m + dist.std * normal(rng);
    if (!dist.truncate_at_zero) continue;
    int tries = 0;
    while (b >= 0.0) {
      if (++tries > kMaxRejections) {
        throw Error(ErrorCode::InvalidConfig, "truncation at zero rejects almost every draw");
      }
      b = m + dist.std * normal(rng);
    }
  }
  return out;
}

CltDiagnostic clt_diagnostic(const regression::DesignMatrix& dm, const std::vector<std::size_t>& sizes,
                             std::uint64_t seed, const CltOptions& options) {
  if (sizes.empty()) throw Error(ErrorCode::InvalidConfig, "no sample sizes");
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0 || (i > 0 && sizes[i] <= sizes[i - 1])) {
      throw Error(ErrorCode::InvalidConfig, "sample sizes must be positive and increasing");
    }
  }
  const auto n_rows = static_cast<std::size_t>(dm.rows());
  if (n_rows == 0) throw Error(ErrorCode::InvalidConfig, "empty design");
  if (options.sampling == RowSampling::Prefix && sizes.back() > n_rows) {
    throw Error(ErrorCode::InvalidConfig, "prefix size exceeds design rows");
  }
  CltDiagnostic out;
  out.sample_sizes = sizes;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto n = sizes[i];
    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(dm.cols(), dm.cols());
    if (options.sampling == RowSampling::Prefix) {
      const auto top = dm.X.topRows(static_cast<Eigen::Index>(n));
      G.selfadjointView<Eigen::Lower>().rankUpdate(top.transpose());
    } else {
      auto rng = make_rng(seed, RngStream::Bootstrap, i);
      std::uniform_int_distribution<std::size_t> pick(0, n_rows - 1);
      Eigen::MatrixXd S(static_cast<Eigen::Index>(n), dm.cols());
      for (Eigen::Index r = 0; r < S.rows(); ++r) S.row(r) = dm.X.row(static_cast<Eigen::Index>(pick(rng)));
      G.selfadjointView<Eigen::Lower>().rankUpdate(S.transpose());
    }
    G = G.selfadjointView<Eigen::Lower>();
    G /= static_cast<double>(n);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G, Eigen::EigenvaluesOnly);
    const auto& ev = eig.eigenvalues();
    out.min_eigenvalues.push_back(ev.minCoeff());
    out.max_eigenvalues.push_back(ev.maxCoeff());
    const bool deficient = ev.minCoeff() < options.min_eigenvalue;
    out.rank_deficient.push_back(deficient);
    if (deficient) {
      out.pass = false;
      out.failures.push_back("n=" + std::to_string(n) + ": minimum eigenvalue " + std::to_string(ev.minCoeff()) +
                             " below " + std::to_string(options.min_eigenvalue));
    }
  }
  try {
    const Eigen::VectorXd d = price_weights(dm);
    const double total = d.squaredNorm();
    out.noether_ratio = total > 0.0 ? d.array().square().maxCoeff() / total : 1.0;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RankDeficient) throw;
    out.noether_ratio = 1.0;
    out.failures.push_back(std::string("full design: ") + e.what());
  }
  if (out.noether_ratio > options.noether_threshold) {
    out.pass = false;
    out.failures.push_back("Noether ratio " + std::to_string(out.noether_ratio) + " exceeds " +
                           std::to_string(options.noether_threshold));
  }
  return out;
}

}  // namespace tariffopt::coeff
