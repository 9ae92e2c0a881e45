#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tariffopt/data.hpp"

namespace tariffopt::regression {

// Predictors computable from the series alone at a single record index.
// Everything demand-related looks back at least one day so that a model
// can forecast the next 24 hours.
struct RawFeature {
  enum class Kind {
    Price,
    Temperature,
    ApparentTemperature,
    Humidity,
    Holiday,
    DemandLag,
    TemperatureLag,
    DemandMin24h,
    DemandMax24h,
    DemandMean24h,
    TemperatureMin24h,
    TemperatureMax24h,
    TemperatureMean24h,
    DayOfWeek,  // dummy; `param` 1..6 for Tuesday..Sunday, Monday is the baseline
  };

  Kind kind = Kind::Price;
  int param = 0;  // lag offset in slots, or weekday index

  std::string name() const;
  static std::optional<RawFeature> parse(std::string_view name);
  // Earliest index at which the feature is defined.
  int required_history() const;

  bool operator==(const RawFeature&) const = default;
};

// Rolling-window statistics cover the 48 slots [t-95, t-48].
inline constexpr int kRollingWindowEnd = 48;
inline constexpr int kRollingWindowStart = 95;

double evaluate(const RawFeature& feature, std::span<const data::MeterRecord> records, std::size_t t);

}  // namespace tariffopt::regression
