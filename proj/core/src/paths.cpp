#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <set>
#include <sstream>

#include "tariffopt/error.hpp"
#include "tariffopt/scenarios.hpp"

namespace tariffopt::scenarios {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int circular_day_offset(Date target, Date other) {
  int d = day_of_year(target) - day_of_year(other);
  if (d > 182) d -= 365;
  if (d < -182) d += 365;
  return d;
}

std::pair<int, int> split_years(const data::SplitSpec& split) {
  return {year_of(split.train.first), year_of(split.test.last)};
}

Eigen::VectorXd nearest_path(const PathLibrary& lib, Date date) {
  for (int k = 0; k <= kFallbackDays; ++k) {
    if (const auto* p = lib.find(date - std::chrono::days(k))) return *p;
    if (k > 0) {
      if (const auto* p = lib.find(date + std::chrono::days(k))) return *p;
    }
  }
  throw Error(ErrorCode::NoPathInRange, "no " + to_string(lib.role()) + " path within " +
                                            std::to_string(kFallbackDays) + " days of " + format_date(date));
}

template <typename Pick>
std::vector<Eigen::VectorXd> sample_with(const PathLibrary& lib, std::span<const Date> targets, std::size_t count,
                                         Pick&& pick) {
  if (targets.empty()) throw Error(ErrorCode::InvalidConfig, "no target dates");
  std::vector<Eigen::VectorXd> out;
  out.reserve(count);
  const auto T = static_cast<Eigen::Index>(targets.size()) * kSlotsPerDay;
  for (std::size_t i = 0; i < count; ++i) {
    Eigen::VectorXd path(T);
    for (std::size_t d = 0; d < targets.size(); ++d) {
      path.segment(static_cast<Eigen::Index>(d) * kSlotsPerDay, kSlotsPerDay) = nearest_path(lib, pick(targets[d]));
    }
    out.push_back(std::move(path));
  }
  return out;
}

RngStream stream_for(PathRole role) { return role == PathRole::Pool ? RngStream::PoolPaths : RngStream::SolarPaths; }

}  // namespace

std::string to_string(PathRole role) { return role == PathRole::Pool ? "pool" : "solar"; }

void PathLibrary::add(Date date, Eigen::VectorXd path) {
  if (path.size() != kSlotsPerDay) {
    throw Error(ErrorCode::InvalidRecord, format_date(date) + ": path has " + std::to_string(path.size()) +
                                              " slots, expected 48");
  }
  for (Eigen::Index t = 0; t < path.size(); ++t) {
    const double v = path[t];
    const bool ok = role_ == PathRole::Pool ? (std::isfinite(v) && v > 0.0) : (v >= 0.0 && v <= 1.0);
    if (!ok) {
      throw Error(ErrorCode::InvalidRecord, format_date(date) + " slot " + std::to_string(t) + ": " +
                                                (role_ == PathRole::Pool ? "pool price must be > 0"
                                                                         : "availability outside [0,1]"));
    }
  }
  paths_[date] = std::move(path);
}

const Eigen::VectorXd* PathLibrary::find(Date date) const {
  auto it = paths_.find(date);
  return it == paths_.end() ? nullptr : &it->second;
}

std::vector<Date> PathLibrary::dates() const {
  std::vector<Date> out;
  out.reserve(paths_.size());
  for (const auto& [d, p] : paths_) out.push_back(d);
  return out;
}

Eigen::VectorXd PathLibrary::horizon_path(std::span<const Date> dates) const {
  Eigen::VectorXd out(static_cast<Eigen::Index>(dates.size()) * kSlotsPerDay);
  for (std::size_t i = 0; i < dates.size(); ++i) {
    const auto* p = find(dates[i]);
    if (p == nullptr) throw Error(ErrorCode::NoPathInRange, "no " + to_string(role_) + " path on " + format_date(dates[i]));
    out.segment(static_cast<Eigen::Index>(i) * kSlotsPerDay, kSlotsPerDay) = *p;
  }
  return out;
}

PathLibrary PathLibrary::parse_csv(std::string_view text, PathRole role) {
  std::map<Date, std::vector<std::pair<int, double>>> rows;  // minute of day, value
  std::size_t start = 0;
  int line_no = 0;
  bool header = true;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = trim(text.substr(start, nl - start));
    start = nl + 1;
    ++line_no;
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.find("timestamp") != std::string_view::npos) continue;
    }
    const auto comma = line.find(',');
    const auto where = "line " + std::to_string(line_no);
    if (comma == std::string_view::npos) throw Error(ErrorCode::InvalidRecord, where + ": expected timestamp,value");
    const auto ts = Timestamp::parse(trim(line.substr(0, comma)));
    if (!ts) throw Error(ErrorCode::InvalidRecord, where + ": bad timestamp");
    const std::string value_text(trim(line.substr(comma + 1)));
    char* end = nullptr;
    const double v = std::strtod(value_text.c_str(), &end);
    if (value_text.empty() || end != value_text.c_str() + value_text.size()) {
      throw Error(ErrorCode::InvalidRecord, where + ": bad value '" + value_text + "'");
    }
    rows[ts->date()].emplace_back(ts->minute_of_day(), v);
  }
  PathLibrary lib(role);
  for (auto& [date, vals] : rows) {
    std::sort(vals.begin(), vals.end());
    Eigen::VectorXd path(kSlotsPerDay);
    if (vals.size() == 24) {
      for (int h = 0; h < 24; ++h) {
        if (vals[static_cast<std::size_t>(h)].first != h * 60) {
          throw Error(ErrorCode::InvalidRecord, format_date(date) + ": hourly rows must be on the hour");
        }
        path[2 * h] = path[2 * h + 1] = vals[static_cast<std::size_t>(h)].second;
      }
    } else if (vals.size() == kSlotsPerDay) {
      for (int s = 0; s < kSlotsPerDay; ++s) {
        if (vals[static_cast<std::size_t>(s)].first != s * kMinutesPerSlot) {
          throw Error(ErrorCode::InvalidRecord, format_date(date) + ": half-hourly rows must be on slot boundaries");
        }
        path[s] = vals[static_cast<std::size_t>(s)].second;
      }
    } else {
      throw Error(ErrorCode::InvalidRecord, format_date(date) + ": " + std::to_string(vals.size()) +
                                                " rows, expected 24 hourly or 48 half-hourly");
    }
    lib.add(date, std::move(path));
  }
  return lib;
}

PathLibrary PathLibrary::from_csv(const std::filesystem::path& path, PathRole role) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), role);
}

std::string PathLibrary::to_csv() const {
  std::string out = "timestamp,value\n";
  char buf[64];
  for (const auto& [date, path] : paths_) {
    for (int s = 0; s < kSlotsPerDay; ++s) {
      std::snprintf(buf, sizeof buf, ",%.17g\n", path[s]);
      out += Timestamp::from_date_slot(date, s).iso();
      out += buf;
    }
  }
  return out;
}

PathLibrary synthesize_library(PathRole role, const SeasonalLibraryConfig& c, std::uint64_t seed) {
  if (c.last < c.first) throw Error(ErrorCode::InvalidConfig, "library range ends before it starts");
  auto rng = make_rng(seed, stream_for(role), 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  PathLibrary lib(role);
  for (Date d = c.first; d <= c.last; d += std::chrono::days(1)) {
    const double doy = day_of_year(d);
    Eigen::VectorXd path(kSlotsPerDay);
    if (role == PathRole::Pool) {
      const double level = c.mean + c.annual_amplitude * std::cos(two_pi * (doy - 15.0) / 365.0) + c.day_noise * normal(rng);
      const int step = c.hourly ? 2 : 1;
      for (int s = 0; s < kSlotsPerDay; s += step) {
        const double hour = s / 2.0;
        const double v = level + c.daily_amplitude * std::cos(two_pi * (hour - 18.0) / 24.0) + c.slot_noise * normal(rng);
        for (int k = 0; k < step; ++k) path[s + k] = std::max(0.5, v);
      }
    } else {
      const double summer = std::cos(two_pi * (doy - 172.0) / 365.0);
      const double length = 12.0 + 4.0 * summer;
      const double sunrise = 12.0 - length / 2.0;
      const double clearness = std::clamp(0.65 + 0.1 * summer + 0.25 * normal(rng), 0.05, 1.0);
      const double peak = 0.6 + 0.4 * summer;
      for (int s = 0; s < kSlotsPerDay; ++s) {
        const double hour = (s + 0.5) / 2.0;
        double v = 0.0;
        if (hour > sunrise && hour < sunrise + length) {
          v = clearness * peak * std::sin(std::numbers::pi * (hour - sunrise) / length) + 0.02 * normal(rng);
        }
        path[s] = std::clamp(v, 0.0, 1.0);
      }
    }
    lib.add(d, std::move(path));
  }
  return lib;
}

std::vector<Date> comparison_dates(const PathLibrary& lib, const data::SplitSpec& split) {
  const auto [y0, y1] = split_years(split);
  std::vector<Date> out;
  for (auto d : lib.dates()) {
    const int y = year_of(d);
    if (y < y0 || y > y1) out.push_back(d);
  }
  return out;
}

DateDistanceDistributions fit_date_distributions(const PathLibrary& lib, const data::SplitSpec& split) {
  split.validate();
  const auto comparison = comparison_dates(lib, split);
  if (comparison.empty()) {
    throw Error(ErrorCode::EmptyComparisonSet, "no " + to_string(lib.role()) + " dates outside the split years");
  }
  std::vector<Date> training;
  for (auto d : lib.dates()) {
    if (split.train.contains(d)) training.push_back(d);
  }
  if (training.empty()) throw Error(ErrorCode::EmptyComparisonSet, "no library dates inside the training range");

  DateDistanceDistributions out;
  std::vector<std::pair<double, Date>> dist(comparison.size());
  double total = 0.0;
  for (auto t : training) {
    const auto& pt = *lib.find(t);
    for (std::size_t i = 0; i < comparison.size(); ++i) {
      dist[i] = {(pt - *lib.find(comparison[i])).norm(), comparison[i]};
    }
    const auto k = std::min<std::size_t>(kNearestDates, dist.size());
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
    for (std::size_t j = 0; j < k; ++j) {
      const Date c = dist[j].second;
      out.day_offset[circular_day_offset(t, c)] += 1.0;
      out.year_offset[year_of(t) - year_of(c)] += 1.0;
      total += 1.0;
    }
  }
  for (auto* pmf : {&out.day_offset, &out.year_offset}) {
    for (auto& [k, v] : *pmf) v /= total;
  }
  return out;
}

Date displace(Date target, int day_offset, int year_offset) {
  const std::chrono::year_month_day ymd{target};
  const int y = static_cast<int>(ymd.year()) - year_offset;
  unsigned day = static_cast<unsigned>(ymd.day());
  const unsigned month = static_cast<unsigned>(ymd.month());
  if (month == 2 && day == 29 && !is_leap(y)) day = 28;
  return make_date(y, month, day) - std::chrono::days(day_offset);
}

std::vector<Eigen::VectorXd> sample_paths(const PathLibrary& lib, const DateDistanceDistributions& dists,
                                          std::span<const Date> target_dates, std::size_t count,
                                          std::uint64_t seed) {
  if (dists.day_offset.empty() || dists.year_offset.empty()) {
    throw Error(ErrorCode::InvalidConfig, "empty date-distance distribution");
  }
  std::vector<int> day_keys, year_keys;
  std::vector<double> day_w, year_w;
  for (const auto& [k, v] : dists.day_offset) {
    day_keys.push_back(k);
    day_w.push_back(v);
  }
  for (const auto& [k, v] : dists.year_offset) {
    year_keys.push_back(k);
    year_w.push_back(v);
  }
  if (lib.size() == 0) throw Error(ErrorCode::NoPathInRange, "empty path library");
  const auto lib_dates = lib.dates();
  const Date first = lib_dates.front(), last = lib_dates.back();
  std::discrete_distribution<std::size_t> day_pick(day_w.begin(), day_w.end());
  std::discrete_distribution<std::size_t> year_pick(year_w.begin(), year_w.end());
  auto rng = make_rng(seed, stream_for(lib.role()));
  constexpr int kMaxDraws = 10000;
  // Offset pairs are redrawn until the displaced date falls inside the library span.
  return sample_with(lib, target_dates, count, [&](Date target) {
    for (int draw = 0; draw < kMaxDraws; ++draw) {
      const int dd = day_keys[day_pick(rng)];
      const int yy = year_keys[year_pick(rng)];
      const Date d = displace(target, dd, yy);
      if (d >= first && d <= last) return d;
    }
    throw Error(ErrorCode::NoPathInRange, "no sampled offset maps " + format_date(target) + " into the library span " +
                                              format_date(first) + " to " + format_date(last));
  });
}

std::vector<Eigen::VectorXd> sample_uniform_paths(const PathLibrary& lib, const data::SplitSpec& split,
                                                  std::span<const Date> target_dates, std::size_t count,
                                                  std::uint64_t seed) {
  const auto comparison = comparison_dates(lib, split);
  if (comparison.empty()) {
    throw Error(ErrorCode::EmptyComparisonSet, "no " + to_string(lib.role()) + " dates outside the split years");
  }
  std::uniform_int_distribution<std::size_t> pick(0, comparison.size() - 1);
  auto rng = make_rng(seed, RngStream::UniformBaseline, static_cast<std::uint64_t>(lib.role()));
  return sample_with(lib, target_dates, count, [&](Date) { return comparison[pick(rng)]; });
}

}  // namespace tariffopt::scenarios
