#include "tariffopt/interior_point.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tariffopt/error.hpp"

namespace tariffopt::optimizer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double step_to_boundary(const Eigen::VectorXd& v, const Eigen::VectorXd& dv, double tau) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (dv[i] < 0.0) a = std::min(a, -tau * v[i] / dv[i]);
  }
  return a;
}

// Masked vectors for variables with a finite bound on one side.
struct Bounds {
  std::vector<Eigen::Index> idx;
  Eigen::VectorXd value;
};

Bounds finite(const Eigen::VectorXd& b) {
  Bounds out;
  for (Eigen::Index i = 0; i < b.size(); ++i) {
    if (std::isfinite(b[i])) out.idx.push_back(i);
  }
  out.value.resize(static_cast<Eigen::Index>(out.idx.size()));
  for (std::size_t j = 0; j < out.idx.size(); ++j) out.value[static_cast<Eigen::Index>(j)] = b[out.idx[j]];
  return out;
}

Eigen::VectorXd gather(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) out[static_cast<Eigen::Index>(j)] = v[idx[j]];
  return out;
}

void scatter_add(Eigen::VectorXd& v, const std::vector<Eigen::Index>& idx, const Eigen::VectorXd& src) {
  for (std::size_t j = 0; j < idx.size(); ++j) v[idx[j]] += src[static_cast<Eigen::Index>(j)];
}

struct Iterate {
  Eigen::VectorXd x;
  double eta = 0.0;
  Eigen::VectorXd s;
  Eigen::VectorXd w;   // slack of the CVaR rows
  Eigen::VectorXd z;   // multiplier of the CVaR rows
  Eigen::VectorXd sl;  // x - lower and upper - x, carried as iterates (finite bounds only)
  Eigen::VectorXd su;
  Eigen::VectorXd zl;  // lower-bound multipliers of x
  Eigen::VectorXd zu;
  Eigen::VectorXd zs;  // multiplier of s >= 0
  Eigen::VectorXd nu;
};

struct Direction {
  Eigen::VectorXd dx;
  double deta = 0.0;
  Eigen::VectorXd ds, dw, dz, dzl, dzu, dzs, dnu;
};

class Engine {
 public:
  Engine(const ScenarioQp& qp, const IpmOptions& opt) : qp_(qp), opt_(opt) {
    n_ = qp.variables();
    cvar_ = qp.chi > 0.0;
    m_ = cvar_ ? static_cast<Eigen::Index>(qp.profits.size()) : 0;
    p_ = qp.A.rows();
    lo_ = finite(qp.lower);
    up_ = finite(qp.upper);
    pi_ = qp.probabilities;
    kappa_ = qp.kappa();
    // Expected profit collapses to one quadratic.
    gbar_ = Eigen::VectorXd::Zero(n_);
    hbar_ = Eigen::VectorXd::Zero(n_);
    kbar_ = 0.0;
    for (std::size_t w = 0; w < qp.profits.size(); ++w) {
      const double pw = pi_[static_cast<Eigen::Index>(w)];
      gbar_ += pw * qp.profits[w].g;
      hbar_ += pw * qp.profits[w].h;
      kbar_ += pw * qp.profits[w].k;
    }
  }

  IpmResult run() {
    Iterate it = start();
    IpmResult res;
    const Eigen::Index pairs = m_ + m_ + static_cast<Eigen::Index>(lo_.idx.size() + up_.idx.size());
    for (int iter = 0; iter <= opt_.max_iterations; ++iter) {
      evaluate(it);
      const double mu = pairs > 0 ? complementarity(it) / static_cast<double>(pairs) : 0.0;
      res.iterations = iter;
      res.primal_residual = primal_norm();
      res.dual_residual = dual_norm();
      res.relative_gap = pairs > 0 ? mu * static_cast<double>(pairs) / (1.0 + std::abs(objective(it))) : 0.0;
      if (res.primal_residual <= opt_.feasibility_tol && res.dual_residual <= opt_.feasibility_tol &&
          res.relative_gap <= opt_.gap_tol) {
        res.status = SolveStatus::Optimal;
        break;
      }
      if (iter == opt_.max_iterations) break;

      // Predictor.
      Direction aff = solve_newton(it, 0.0, nullptr);
      const double a_aff = max_step(it, aff, 1.0);
      double sigma = 0.0;
      if (pairs > 0) {
        const double mu_aff = complementarity_after(it, aff, a_aff) / static_cast<double>(pairs);
        sigma = std::pow(std::clamp(mu_aff / std::max(mu, 1e-300), 0.0, 1.0), 3);
      }
      // Corrector.
      Direction d = solve_newton(it, sigma * mu, &aff);
      if (!d.dx.allFinite() || !std::isfinite(d.deta)) break;
      const double a = max_step(it, d, opt_.step_fraction);
      apply(it, d, a);
    }
    evaluate(it);
    res.x = it.x;
    res.eta = it.eta;
    res.s = it.s;
    res.z = it.z;
    res.nu = it.nu;
    res.objective = objective(it);
    return res;
  }

 private:
  Iterate start() const {
    Iterate it;
    it.x.resize(n_);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double l = qp_.lower[i], u = qp_.upper[i];
      double v = qp_.x0.size() == n_ ? qp_.x0[i] : 0.0;
      if (std::isfinite(l) && std::isfinite(u)) {
        const double margin = 0.05 * (u - l);
        if (qp_.x0.size() != n_) v = 0.5 * (l + u);
        v = std::clamp(v, l + margin, u - margin);
      } else if (std::isfinite(l)) {
        v = std::max(v, l + 1.0);
      } else if (std::isfinite(u)) {
        v = std::min(v, u - 1.0);
      }
      it.x[i] = v;
    }
    it.sl = gather(it.x, lo_.idx) - lo_.value;
    it.su = up_.value - gather(it.x, up_.idx);
    it.zl = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(lo_.idx.size()));
    it.zu = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(up_.idx.size()));
    it.nu = Eigen::VectorXd::Zero(p_);
    if (cvar_) {
      Eigen::VectorXd prof(m_);
      for (Eigen::Index w = 0; w < m_; ++w) prof[w] = qp_.profits[static_cast<std::size_t>(w)](it.x);
      const double spread = prof.maxCoeff() - prof.minCoeff();
      const double delta = 1.0 + 0.1 * spread;
      it.eta = pi_.dot(prof);
      it.s = (it.eta - prof.array()).max(0.0).matrix() + Eigen::VectorXd::Constant(m_, delta);
      it.w = it.s + prof - Eigen::VectorXd::Constant(m_, it.eta);
      const double chi = qp_.chi;
      it.z = chi * pi_;
      it.zs = (chi * (kappa_ - 1.0) * pi_).cwiseMax(1e-8);
      it.z = it.z.cwiseMax(1e-8);
    } else {
      it.s.resize(0);
      it.w.resize(0);
      it.z.resize(0);
      it.zs.resize(0);
    }
    return it;
  }

  double objective(const Iterate& it) const {
    double f = (1.0 - qp_.chi) * (kbar_ + gbar_.dot(it.x) + 0.5 * hbar_.dot(it.x.cwiseAbs2()));
    if (cvar_) f += qp_.chi * (it.eta - kappa_ * pi_.dot(it.s));
    return f;
  }

  // Residuals and constraint Jacobian at the current iterate.
  void evaluate(const Iterate& it) {
    const double chi = qp_.chi;
    grad_f_ = -(1.0 - chi) * (gbar_ + hbar_.cwiseProduct(it.x));
    hess_ = -(1.0 - chi) * hbar_;
    G_.resize(m_, n_);
    rc_.resize(m_);
    for (Eigen::Index w = 0; w < m_; ++w) {
      const auto& P = qp_.profits[static_cast<std::size_t>(w)];
      G_.row(w) = (P.g + P.h.cwiseProduct(it.x)).transpose();
      rc_[w] = it.s[w] + P(it.x) - it.eta - it.w[w];
      hess_ -= it.z[w] * P.h;
    }
    rdx_ = grad_f_;
    if (m_ > 0) rdx_ -= G_.transpose() * it.z;
    for (std::size_t j = 0; j < lo_.idx.size(); ++j) rdx_[lo_.idx[j]] -= it.zl[static_cast<Eigen::Index>(j)];
    for (std::size_t j = 0; j < up_.idx.size(); ++j) rdx_[up_.idx[j]] += it.zu[static_cast<Eigen::Index>(j)];
    if (p_ > 0) rdx_ -= qp_.A.transpose() * it.nu;
    if (cvar_) {
      rdeta_ = -chi + it.z.sum();
      rds_ = chi * kappa_ * pi_ - it.z - it.zs;
    }
    rp_ = p_ > 0 ? Eigen::VectorXd(qp_.A * it.x - qp_.b) : Eigen::VectorXd();
    scale_c_ = 1.0 + (m_ > 0 ? it.w.cwiseAbs().maxCoeff() : 0.0);
    scale_d_ = 1.0 + grad_f_.cwiseAbs().maxCoeff() + (cvar_ ? chi * kappa_ * pi_.maxCoeff() : 0.0);
  }

  double primal_norm() const {
    double r = 0.0;
    if (m_ > 0) r = std::max(r, rc_.cwiseAbs().maxCoeff() / scale_c_);
    if (p_ > 0) r = std::max(r, rp_.cwiseAbs().maxCoeff() / (1.0 + qp_.b.cwiseAbs().maxCoeff()));
    return r;
  }

  double dual_norm() const {
    double r = n_ > 0 ? rdx_.cwiseAbs().maxCoeff() : 0.0;
    if (cvar_) r = std::max({r, std::abs(rdeta_), rds_.cwiseAbs().maxCoeff()});
    return r / scale_d_;
  }

  double complementarity(const Iterate& it) const {
    double c = 0.0;
    if (m_ > 0) c += it.w.dot(it.z) + it.s.dot(it.zs);
    c += it.sl.dot(it.zl);
    c += it.su.dot(it.zu);
    return c;
  }

  double complementarity_after(const Iterate& it, const Direction& d, double a) const {
    double c = 0.0;
    if (m_ > 0) {
      c += (it.w + a * d.dw).dot(it.z + a * d.dz);
      c += (it.s + a * d.ds).dot(it.zs + a * d.dzs);
    }
    c += (it.sl + a * gather(d.dx, lo_.idx)).dot(it.zl + a * d.dzl);
    c += (it.su - a * gather(d.dx, up_.idx)).dot(it.zu + a * d.dzu);
    return c;
  }

  double max_step(const Iterate& it, const Direction& d, double tau) const {
    double a = 1.0;
    if (m_ > 0) {
      a = std::min({a, step_to_boundary(it.w, d.dw, tau), step_to_boundary(it.z, d.dz, tau),
                    step_to_boundary(it.s, d.ds, tau), step_to_boundary(it.zs, d.dzs, tau)});
    }
    a = std::min(a, step_to_boundary(it.sl, gather(d.dx, lo_.idx), tau));
    a = std::min(a, step_to_boundary(it.su, -gather(d.dx, up_.idx), tau));
    a = std::min({a, step_to_boundary(it.zl, d.dzl, tau), step_to_boundary(it.zu, d.dzu, tau)});
    return a;
  }

  void apply(Iterate& it, const Direction& d, double a) const {
    it.x += a * d.dx;
    it.sl += a * gather(d.dx, lo_.idx);
    it.su -= a * gather(d.dx, up_.idx);
    it.zl += a * d.dzl;
    it.zu += a * d.dzu;
    if (p_ > 0) it.nu += a * d.dnu;
    if (m_ > 0) {
      it.eta += a * d.deta;
      it.s += a * d.ds;
      it.w += a * d.dw;
      it.z += a * d.dz;
      it.zs += a * d.dzs;
    }
  }

  // One Newton step on the perturbed KKT system. `aff` adds Mehrotra's
  // second-order correction.
  Direction solve_newton(const Iterate& it, double target, const Direction* aff) const {
    const Eigen::VectorXd& sl = it.sl;
    const Eigen::VectorXd& su = it.su;
    Eigen::VectorXd r_l = sl.cwiseProduct(it.zl).array() - target;
    Eigen::VectorXd r_u = su.cwiseProduct(it.zu).array() - target;
    Eigen::VectorXd r_wz, r_s;
    if (m_ > 0) {
      r_wz = it.w.cwiseProduct(it.z).array() - target;
      r_s = it.s.cwiseProduct(it.zs).array() - target;
    }
    if (aff != nullptr) {
      r_l += gather(aff->dx, lo_.idx).cwiseProduct(aff->dzl);
      r_u -= gather(aff->dx, up_.idx).cwiseProduct(aff->dzu);
      if (m_ > 0) {
        r_wz += aff->dw.cwiseProduct(aff->dz);
        r_s += aff->ds.cwiseProduct(aff->dzs);
      }
    }

    // Diagonal of the x block from curvature and bounds.
    Eigen::VectorXd dxx = hess_;
    Eigen::VectorXd rhs_x = -rdx_;
    {
      Eigen::VectorXd sig = it.zl.cwiseQuotient(sl);
      scatter_add(dxx, lo_.idx, sig);
      scatter_add(rhs_x, lo_.idx, -r_l.cwiseQuotient(sl));
      sig = it.zu.cwiseQuotient(su);
      scatter_add(dxx, up_.idx, sig);
      scatter_add(rhs_x, up_.idx, r_u.cwiseQuotient(su));
    }

    Direction d;
    if (m_ == 0) {
      // Diagonal system with optional equality Schur complement.
      Eigen::VectorXd kinv(n_);
      for (Eigen::Index i = 0; i < n_; ++i) kinv[i] = 1.0 / std::max(dxx[i], 1e-300);
      if (p_ > 0) {
        const Eigen::MatrixXd AK = qp_.A * kinv.asDiagonal();
        const Eigen::MatrixXd S = AK * qp_.A.transpose();
        const Eigen::VectorXd r = -rp_ - AK * rhs_x;
        d.dnu = S.ldlt().solve(r);
        d.dx = kinv.cwiseProduct(rhs_x + qp_.A.transpose() * d.dnu);
      } else {
        d.dx = kinv.cwiseProduct(rhs_x);
      }
    } else {
      // Rows: s_w + P_w(x) - eta - w_w = 0, Jacobian [G, -1, I].
      const Eigen::VectorXd q = it.z.cwiseQuotient(it.w);
      const Eigen::VectorXd sig_s = it.zs.cwiseQuotient(it.s);
      const Eigen::VectorXd dss = q + sig_s;
      // Full-space right-hand side: -r_d - J'(r_wz/w) - J'Q r_c, plus bound terms on s.
      const Eigen::VectorXd t = r_wz.cwiseQuotient(it.w) + q.cwiseProduct(rc_);
      rhs_x -= G_.transpose() * t;
      double rhs_eta = -rdeta_ + t.sum();
      const Eigen::VectorXd rhs_s = -rds_ - t - r_s.cwiseQuotient(it.s);
      // Eliminate s (diagonal block).
      const Eigen::VectorXd r = q.cwiseProduct(sig_s).cwiseQuotient(dss);  // q - q^2 / dss, without cancellation
      const Eigen::VectorXd qs = q.cwiseProduct(rhs_s).cwiseQuotient(dss);
      rhs_x -= G_.transpose() * qs;
      rhs_eta += qs.sum();
      const Eigen::Index nk = n_ + 1;
      Eigen::MatrixXd K = Eigen::MatrixXd::Zero(nk, nk);
      Eigen::MatrixXd Gh(m_, nk);
      Gh.leftCols(n_) = G_;
      Gh.col(n_).setConstant(-1.0);
      K.selfadjointView<Eigen::Lower>().rankUpdate((Gh.transpose() * r.cwiseSqrt().asDiagonal()));
      K = K.selfadjointView<Eigen::Lower>();
      K.diagonal().head(n_) += dxx;
      // Symmetric diagonal equilibration; barrier terms span many orders of magnitude.
      const Eigen::VectorXd eq = K.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
      Eigen::MatrixXd Ke = eq.asDiagonal() * K * eq.asDiagonal();
      Ke.diagonal().array() += 1e-14;
      Eigen::VectorXd rhs(nk);
      rhs.head(n_) = rhs_x;
      rhs[n_] = rhs_eta;
      Eigen::VectorXd sol;
      Eigen::LLT<Eigen::MatrixXd> llt(Ke);
      auto solveK = [&](const auto& b) -> Eigen::MatrixXd {
        const Eigen::MatrixXd be = eq.asDiagonal() * b;
        if (llt.info() == Eigen::Success) return eq.asDiagonal() * llt.solve(be);
        return eq.asDiagonal() * Ke.ldlt().solve(be);
      };
      if (p_ > 0) {
        Eigen::MatrixXd Ah = Eigen::MatrixXd::Zero(p_, nk);
        Ah.leftCols(n_) = qp_.A;
        const Eigen::MatrixXd KiAt = solveK(Ah.transpose());
        const Eigen::MatrixXd S = Ah * KiAt;
        const Eigen::VectorXd Kr = solveK(rhs);
        d.dnu = S.ldlt().solve(-rp_ - Ah * Kr);
        sol = Kr + KiAt * d.dnu;
      } else {
        sol = solveK(rhs);
      }
      d.dx = sol.head(n_);
      d.deta = sol[n_];
      // M_sx ds row w = q_w G_w dx, M_s,eta = -q_w.
      d.ds = (rhs_s - q.cwiseProduct(G_ * d.dx) + q * d.deta).cwiseQuotient(dss);
      d.dw = G_ * d.dx - Eigen::VectorXd::Constant(m_, d.deta) + d.ds + rc_;
      d.dz = -r_wz.cwiseQuotient(it.w) - q.cwiseProduct(d.dw);
      d.dzs = (-r_s - it.zs.cwiseProduct(d.ds)).cwiseQuotient(it.s);
    }
    d.dzl = (-r_l - it.zl.cwiseProduct(gather(d.dx, lo_.idx))).cwiseQuotient(sl);
    d.dzu = (-r_u + it.zu.cwiseProduct(gather(d.dx, up_.idx))).cwiseQuotient(su);
    return d;
  }

  const ScenarioQp& qp_;
  IpmOptions opt_;
  Eigen::Index n_ = 0, m_ = 0, p_ = 0;
  bool cvar_ = false;
  Bounds lo_, up_;
  Eigen::VectorXd pi_;
  double kappa_ = 1.0;
  Eigen::VectorXd gbar_, hbar_;
  double kbar_ = 0.0;

  Eigen::VectorXd grad_f_, hess_, rdx_, rds_, rc_, rp_;
  Eigen::MatrixXd G_;
  double rdeta_ = 0.0;
  double scale_c_ = 1.0, scale_d_ = 1.0;
};

}  // namespace

double QuadProfit::operator()(const Eigen::VectorXd& x) const {
  return k + g.dot(x) + 0.5 * h.dot(x.cwiseAbs2());
}

std::string to_string(SolveStatus s) {
  return s == SolveStatus::Optimal ? "optimal" : "max_iterations";
}

IpmResult solve_ipm(const ScenarioQp& qp, const IpmOptions& options) {
  const auto n = qp.variables();
  if (qp.upper.size() != n) throw Error(ErrorCode::LengthMismatch, "bound vectors differ in length");
  if (qp.profits.empty()) throw Error(ErrorCode::InvalidConfig, "no scenario profits");
  if (qp.probabilities.size() != static_cast<Eigen::Index>(qp.profits.size())) {
    throw Error(ErrorCode::LengthMismatch, "one probability per scenario profit is required");
  }
  for (const auto& p : qp.profits) {
    if (p.g.size() != n || p.h.size() != n) throw Error(ErrorCode::LengthMismatch, "profit dimension differs");
    if ((p.h.array() > 0.0).any()) throw Error(ErrorCode::NonConcave, "scenario profit has positive curvature");
  }
  if (qp.A.rows() > 0 && (qp.A.cols() != n || qp.b.size() != qp.A.rows())) {
    throw Error(ErrorCode::LengthMismatch, "equality block has the wrong shape");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!(qp.lower[i] < qp.upper[i])) throw Error(ErrorCode::Infeasible, "empty bound interval");
  }
  if (!(qp.chi >= 0.0 && qp.chi <= 1.0)) throw Error(ErrorCode::InvalidConfig, "chi outside [0,1]");
  if (!(qp.alpha > 0.0 && qp.alpha < 1.0)) throw Error(ErrorCode::InvalidConfig, "alpha outside (0,1)");
  IpmResult res;
  if (n == 0) {
    // Every decision fixed: nothing to iterate on.
    res.status = SolveStatus::Optimal;
    res.x = Eigen::VectorXd(0);
  } else {
    res = Engine(qp, options).run();
  }
  const auto m = static_cast<Eigen::Index>(qp.profits.size());
  Eigen::VectorXd P(m);
  for (Eigen::Index w = 0; w < m; ++w) P[w] = qp.profits[static_cast<std::size_t>(w)](res.x);
  const double expected = qp.probabilities.dot(P);
  if (qp.chi > 0.0) {
    const auto [cv, eta] = cvar_crossover(P, qp.probabilities, qp.alpha, res.eta);
    res.eta = eta;
    res.s = (Eigen::VectorXd::Constant(m, eta) - P).cwiseMax(0.0);
    res.objective = (1.0 - qp.chi) * expected + qp.chi * cv;
  } else {
    res.objective = expected;
  }
  return res;
}

std::pair<double, double> cvar_crossover(const Eigen::VectorXd& profits, const Eigen::VectorXd& probs,
                                         double alpha, double eta_guess) {
  const double kappa = 1.0 / (1.0 - alpha);
  std::vector<double> cand(profits.data(), profits.data() + profits.size());
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  auto phi = [&](double eta) {
    double tail = 0.0;
    for (Eigen::Index w = 0; w < profits.size(); ++w) tail += probs[w] * std::max(0.0, eta - profits[w]);
    return eta - kappa * tail;
  };
  auto pos = static_cast<std::size_t>(std::lower_bound(cand.begin(), cand.end(), eta_guess) - cand.begin());
  if (pos == cand.size()) --pos;
  if (pos > 0 && std::abs(cand[pos - 1] - eta_guess) < std::abs(cand[pos] - eta_guess)) --pos;
  double best = phi(cand[pos]);
  while (true) {
    if (pos + 1 < cand.size()) {
      const double up = phi(cand[pos + 1]);
      if (up > best) {
        best = up;
        ++pos;
        continue;
      }
    }
    if (pos > 0) {
      const double down = phi(cand[pos - 1]);
      if (down >= best) {
        best = down;
        --pos;
        continue;
      }
    }
    break;
  }
  return {best, cand[pos]};
}

}  // namespace tariffopt::optimizer
