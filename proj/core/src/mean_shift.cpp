#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "tariffopt/error.hpp"
#include "tariffopt/scenarios.hpp"

namespace tariffopt::scenarios {

namespace {

struct Cluster {
  double mode = 0.0;
  std::vector<int> members;
  int representative = -1;
};

// Sorted view with prefix sums for O(log n) flat-kernel windows.
class SortedValues {
 public:
  SortedValues(std::span<const double> values, std::span<const double> weights) {
    order_.resize(values.size());
    std::iota(order_.begin(), order_.end(), 0);
    std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
      return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
    });
    sorted_.reserve(values.size());
    mass_.assign(values.size() + 1, 0.0);
    moment_.assign(values.size() + 1, 0.0);
    for (std::size_t i = 0; i < order_.size(); ++i) {
      const auto j = static_cast<std::size_t>(order_[i]);
      sorted_.push_back(values[j]);
      mass_[i + 1] = mass_[i] + weights[j];
      moment_[i + 1] = moment_[i] + weights[j] * values[j];
    }
  }

  std::pair<std::size_t, std::size_t> window(double x, double h) const {
    const auto lo = std::lower_bound(sorted_.begin(), sorted_.end(), x - h) - sorted_.begin();
    const auto hi = std::upper_bound(sorted_.begin(), sorted_.end(), x + h) - sorted_.begin();
    return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
  }
  double mass(std::size_t lo, std::size_t hi) const { return mass_[hi] - mass_[lo]; }
  double mean(std::size_t lo, std::size_t hi) const { return (moment_[hi] - moment_[lo]) / mass(lo, hi); }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<int> order_;
  std::vector<double> sorted_;
  std::vector<double> mass_;
  std::vector<double> moment_;
};

int nearest_member(const Cluster& c, std::span<const double> values) {
  int best = -1;
  double best_d = 0.0;
  for (int i : c.members) {
    const double d = std::abs(values[static_cast<std::size_t>(i)] - c.mode);
    if (best < 0 || d < best_d || (d == best_d && i < best)) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

double weighted_quantile(std::vector<std::pair<double, double>> vw, double q) {
  std::sort(vw.begin(), vw.end());
  double total = 0.0;
  for (const auto& [v, w] : vw) total += w;
  double cum = 0.0;
  for (const auto& [v, w] : vw) {
    cum += w;
    if (cum >= q * total) return v;
  }
  return vw.back().first;
}

}  // namespace

double silverman_bandwidth(std::span<const double> values, std::span<const double> weights) {
  if (values.empty() || values.size() != weights.size()) {
    throw Error(ErrorCode::LengthMismatch, "values and weights must be non-empty and equal in length");
  }
  double total = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    total += weights[i];
    mean += weights[i] * values[i];
  }
  mean /= total;
  double var = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) var += weights[i] * (values[i] - mean) * (values[i] - mean);
  const double sd = std::sqrt(var / total);
  std::vector<std::pair<double, double>> vw;
  for (std::size_t i = 0; i < values.size(); ++i) vw.emplace_back(values[i], weights[i]);
  const double iqr = weighted_quantile(vw, 0.75) - weighted_quantile(vw, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (spread <= 0.0) spread = std::max(sd, iqr / 1.34);
  return 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
}

ReductionResult reduce_by_objective(std::span<const double> values, std::span<const double> weights,
                                    std::optional<double> bandwidth) {
  const auto n = values.size();
  if (n == 0 || weights.size() != n) {
    throw Error(ErrorCode::LengthMismatch, "values and weights must be non-empty and equal in length");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(values[i])) throw Error(ErrorCode::InvalidConfig, "non-finite objective at " + std::to_string(i));
    if (!(weights[i] > 0.0)) throw Error(ErrorCode::InvalidConfig, "weights must be positive");
  }
  if (bandwidth && !(*bandwidth > 0.0 && std::isfinite(*bandwidth))) {
    throw Error(ErrorCode::ZeroBandwidth, "bandwidth must be positive");
  }
  ReductionResult out;
  out.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(values, weights);
  const double h = out.bandwidth;

  const bool all_equal = std::all_of(values.begin(), values.end(), [&](double v) { return v == values[0]; });
  std::vector<Cluster> clusters;
  if (all_equal || h <= 0.0) {
    Cluster c;
    c.mode = values[0];
    c.members.resize(n);
    std::iota(c.members.begin(), c.members.end(), 0);
    clusters.push_back(std::move(c));
  } else {
    const SortedValues sv(values, weights);
    // Modes keyed by their converged window; identical windows give identical means.
    std::map<std::pair<std::size_t, std::size_t>, double> modes;
    double previous_seed = std::numeric_limits<double>::quiet_NaN();
    for (double seed : sv.sorted()) {
      if (seed == previous_seed) continue;
      previous_seed = seed;
      double x = seed;
      auto win = sv.window(x, h);
      for (int iter = 0; iter < 10000; ++iter) {
        x = sv.mean(win.first, win.second);
        const auto next = sv.window(x, h);
        if (next == win) break;
        win = next;
      }
      modes.emplace(win, x);
    }
    // Denser modes suppress any other mode within the bandwidth.
    std::vector<std::pair<double, double>> ranked;  // density, position
    for (const auto& [win, x] : modes) ranked.emplace_back(sv.mass(win.first, win.second), x);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    std::vector<double> kept;
    for (const auto& [density, x] : ranked) {
      if (std::none_of(kept.begin(), kept.end(), [&](double k) { return std::abs(k - x) <= h; })) kept.push_back(x);
    }
    std::sort(kept.begin(), kept.end());
    clusters.resize(kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) clusters[k].mode = kept[k];
    for (std::size_t i = 0; i < n; ++i) {
      const auto it = std::lower_bound(kept.begin(), kept.end(), values[i]);
      std::size_t k = static_cast<std::size_t>(it - kept.begin());
      if (k == kept.size() || (k > 0 && values[i] - kept[k - 1] <= kept[k] - values[i])) --k;
      clusters[k].members.push_back(static_cast<int>(i));
    }
    std::erase_if(clusters, [](const Cluster& c) { return c.members.empty(); });
  }
  for (auto& c : clusters) c.representative = nearest_member(c, values);

  // Merge until representatives are more than one bandwidth apart.
  auto rep_value = [&](const Cluster& c) { return values[static_cast<std::size_t>(c.representative)]; };
  while (clusters.size() > 1) {
    std::sort(clusters.begin(), clusters.end(),
              [&](const Cluster& a, const Cluster& b) { return rep_value(a) < rep_value(b); });
    std::size_t best = clusters.size();
    double best_gap = 0.0;
    for (std::size_t k = 0; k + 1 < clusters.size(); ++k) {
      const double gap = rep_value(clusters[k + 1]) - rep_value(clusters[k]);
      if (gap <= h && (best == clusters.size() || gap < best_gap)) {
        best = k;
        best_gap = gap;
      }
    }
    if (best == clusters.size()) break;
    auto& a = clusters[best];
    auto& b = clusters[best + 1];
    a.members.insert(a.members.end(), b.members.begin(), b.members.end());
    std::sort(a.members.begin(), a.members.end());
    double mass = 0.0, moment = 0.0;
    for (int i : a.members) {
      mass += weights[static_cast<std::size_t>(i)];
      moment += weights[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(i)];
    }
    a.mode = moment / mass;
    a.representative = nearest_member(a, values);
    clusters.erase(clusters.begin() + static_cast<std::ptrdiff_t>(best) + 1);
  }
  std::sort(clusters.begin(), clusters.end(), [&](const Cluster& a, const Cluster& b) {
    return rep_value(a) != rep_value(b) ? rep_value(a) < rep_value(b) : a.representative < b.representative;
  });

  out.labels.assign(n, -1);
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    auto& c = clusters[k];
    std::sort(c.members.begin(), c.members.end());
    double p = 0.0;
    for (int i : c.members) {
      out.labels[static_cast<std::size_t>(i)] = static_cast<int>(k);
      p += weights[static_cast<std::size_t>(i)];
    }
    out.modes.push_back(c.mode);
    out.representatives.push_back(c.representative);
    out.probabilities.push_back(p);
  }
  return out;
}

double wasserstein1(std::span<const double> a, std::span<const double> wa, std::span<const double> b,
                    std::span<const double> wb) {
  if (a.size() != wa.size() || b.size() != wb.size() || a.empty() || b.empty()) {
    throw Error(ErrorCode::LengthMismatch, "wasserstein inputs must be non-empty with one weight per value");
  }
  struct Atom {
    double x;
    double da;
    double db;
  };
  std::vector<Atom> atoms;
  const double ta = std::accumulate(wa.begin(), wa.end(), 0.0);
  const double tb = std::accumulate(wb.begin(), wb.end(), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) atoms.push_back({a[i], wa[i] / ta, 0.0});
  for (std::size_t i = 0; i < b.size(); ++i) atoms.push_back({b[i], 0.0, wb[i] / tb});
  std::sort(atoms.begin(), atoms.end(), [](const Atom& l, const Atom& r) { return l.x < r.x; });
  double fa = 0.0, fb = 0.0, w = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    fa += atoms[i].da;
    fb += atoms[i].db;
    w += std::abs(fa - fb) * (atoms[i + 1].x - atoms[i].x);
  }
  return w;
}

}  // namespace tariffopt::scenarios
