#include "tariffopt/features.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

#include "tariffopt/error.hpp"

namespace tariffopt::regression {

namespace {

struct NamedKind {
  RawFeature::Kind kind;
  std::string_view name;
};

constexpr NamedKind kFixedNames[] = {
    {RawFeature::Kind::Price, "price"},
    {RawFeature::Kind::Temperature, "temperature"},
    {RawFeature::Kind::ApparentTemperature, "apparent_temp"},
    {RawFeature::Kind::Humidity, "humidity"},
    {RawFeature::Kind::Holiday, "holiday"},
    {RawFeature::Kind::DemandMin24h, "demand_min_24h"},
    {RawFeature::Kind::DemandMax24h, "demand_max_24h"},
    {RawFeature::Kind::DemandMean24h, "demand_mean_24h"},
    {RawFeature::Kind::TemperatureMin24h, "temp_min_24h"},
    {RawFeature::Kind::TemperatureMax24h, "temp_max_24h"},
    {RawFeature::Kind::TemperatureMean24h, "temp_mean_24h"},
};

std::optional<int> suffix_int(std::string_view name, std::string_view prefix) {
  if (name.substr(0, prefix.size()) != prefix) return std::nullopt;
  auto digits = name.substr(prefix.size());
  int value = 0;
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) return std::nullopt;
  return value;
}

enum class Stat { Min, Max, Mean };

double window_stat(std::span<const data::MeterRecord> records, std::size_t t, bool demand, Stat stat) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  for (std::size_t k = t - kRollingWindowStart; k <= t - kRollingWindowEnd; ++k) {
    const double v = demand ? records[k].demand : records[k].temperature;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    sum += v;
  }
  switch (stat) {
    case Stat::Min: return lo;
    case Stat::Max: return hi;
    case Stat::Mean: break;
  }
  return sum / static_cast<double>(kRollingWindowStart - kRollingWindowEnd + 1);
}

}  // namespace

std::string RawFeature::name() const {
  switch (kind) {
    case Kind::DemandLag: return "demand_lag_" + std::to_string(param);
    case Kind::TemperatureLag: return "temp_lag_" + std::to_string(param);
    case Kind::DayOfWeek: return "dow_" + std::to_string(param);
    default: break;
  }
  for (const auto& entry : kFixedNames) {
    if (entry.kind == kind) return std::string(entry.name);
  }
  return "unknown";
}

std::optional<RawFeature> RawFeature::parse(std::string_view name) {
  for (const auto& entry : kFixedNames) {
    if (entry.name == name) return RawFeature{entry.kind, 0};
  }
  if (auto lag = suffix_int(name, "demand_lag_"); lag && *lag >= 1) return RawFeature{Kind::DemandLag, *lag};
  if (auto lag = suffix_int(name, "temp_lag_"); lag && *lag >= 1) return RawFeature{Kind::TemperatureLag, *lag};
  if (auto d = suffix_int(name, "dow_"); d && *d >= 1 && *d <= 6) return RawFeature{Kind::DayOfWeek, *d};
  return std::nullopt;
}

int RawFeature::required_history() const {
  switch (kind) {
    case Kind::DemandLag:
    case Kind::TemperatureLag: return param;
    case Kind::DemandMin24h:
    case Kind::DemandMax24h:
    case Kind::DemandMean24h:
    case Kind::TemperatureMin24h:
    case Kind::TemperatureMax24h:
    case Kind::TemperatureMean24h: return kRollingWindowStart;
    default: return 0;
  }
}

double evaluate(const RawFeature& feature, std::span<const data::MeterRecord> records, std::size_t t) {
  if (t < static_cast<std::size_t>(feature.required_history()) || t >= records.size()) {
    throw Error(ErrorCode::InsufficientHistory,
                feature.name() + " undefined at row " + std::to_string(t));
  }
  const auto& r = records[t];
  using K = RawFeature::Kind;
  switch (feature.kind) {
    case K::Price: return r.price;
    case K::Temperature: return r.temperature;
    case K::ApparentTemperature: return r.apparent_temperature;
    case K::Humidity: return r.humidity;
    case K::Holiday: return r.holiday ? 1.0 : 0.0;
    case K::DemandLag: return records[t - feature.param].demand;
    case K::TemperatureLag: return records[t - feature.param].temperature;
    case K::DemandMin24h: return window_stat(records, t, true, Stat::Min);
    case K::DemandMax24h: return window_stat(records, t, true, Stat::Max);
    case K::DemandMean24h: return window_stat(records, t, true, Stat::Mean);
    case K::TemperatureMin24h: return window_stat(records, t, false, Stat::Min);
    case K::TemperatureMax24h: return window_stat(records, t, false, Stat::Max);
    case K::TemperatureMean24h: return window_stat(records, t, false, Stat::Mean);
    case K::DayOfWeek: return weekday_index(r.timestamp.date()) == feature.param ? 1.0 : 0.0;
  }
  return 0.0;
}

}  // namespace tariffopt::regression
