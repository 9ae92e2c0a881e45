#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "tariffopt/calendar.hpp"

namespace tariffopt::data {

// Fixed project units: demand in kWh per half-hour, prices in p/kWh.
struct MeterRecord {
  Timestamp timestamp;
  double demand = 0.0;
  double price = 0.0;
  double temperature = 0.0;
  double apparent_temperature = 0.0;
  double humidity = 0.0;
  bool holiday = false;

  bool operator==(const MeterRecord&) const = default;
};

// Contiguous half-hourly series. Construction validates every invariant,
// so a MeterSeries in hand is always gap-free and strictly increasing.
class MeterSeries {
 public:
  MeterSeries() = default;
  MeterSeries(std::vector<MeterRecord> records, int aggregation_count,
              std::vector<std::size_t> imputed_rows = {});

  std::span<const MeterRecord> records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const MeterRecord& operator[](std::size_t i) const { return records_[i]; }
  int aggregation_count() const { return aggregation_count_; }
  // Rows filled by gap interpolation during ingest (empty when rejecting gaps).
  std::span<const std::size_t> imputed_rows() const { return imputed_; }
  Timestamp first_timestamp() const { return records_.front().timestamp; }
  Timestamp last_timestamp() const { return records_.back().timestamp; }
  // Index of the record at `t`, or -1 when outside the series.
  std::ptrdiff_t index_of(Timestamp t) const;

  bool operator==(const MeterSeries&) const = default;

 private:
  std::vector<MeterRecord> records_;
  int aggregation_count_ = 1;
  std::vector<std::size_t> imputed_;
};

struct SplitSpec {
  DateRange train;
  DateRange validation;
  DateRange test;

  // Throws InvalidConfig unless ranges are well-formed, disjoint and ordered
  // train < validation < test.
  void validate() const;
};

struct CsvSchema {
  std::string timestamp = "timestamp";
  std::string demand = "demand_kwh";
  std::string price = "price_p_kwh";
  std::string temperature = "temp_c";
  std::string apparent_temperature = "apparent_temp_c";
  std::string humidity = "humidity";
  std::string holiday = "holiday";
};

enum class GapPolicy {
  Reject,
  // Linear interpolation of gaps of at most `max_interpolated_gap` slots;
  // filled rows are listed in MeterSeries::imputed_rows().
  Interpolate,
};

struct IngestOptions {
  GapPolicy gap_policy = GapPolicy::Reject;
  int max_interpolated_gap = 2;
  int aggregation_count = 1;
};

MeterSeries ingest_csv(const std::filesystem::path& path, const CsvSchema& schema = {},
                       const IngestOptions& options = {});
MeterSeries parse_csv(std::string_view text, const CsvSchema& schema = {},
                      const IngestOptions& options = {});

// Writes the canonical CSV layout with round-trip precision.
void write_csv(const MeterSeries& series, const std::filesystem::path& path);
std::string to_csv(const MeterSeries& series);

// Compact binary snapshot ("TOMS" magic, version 1, little-endian doubles).
void write_binary(const MeterSeries& series, const std::filesystem::path& path);
MeterSeries read_binary(const std::filesystem::path& path);
// Dispatches on extension: ".bin" reads the binary snapshot, anything else CSV.
MeterSeries load_series(const std::filesystem::path& path);

// Marks records whose date appears in `holidays` (locale calendars live in config).
MeterSeries apply_holidays(const MeterSeries& series, std::span<const Date> holidays);
std::vector<Date> read_holiday_file(const std::filesystem::path& path);

// Mean demand across households; exogenous fields are taken from the first
// series and must agree across all of them.
MeterSeries aggregate_households(std::span<const MeterSeries> per_household);

// ---------------------------------------------------------------------------
// Synthetic data with planted ground truth.

struct PriceLevels {
  double low = 3.99;
  double normal = 11.76;
  double high = 67.20;
  double low_frequency = 0.15;
  double high_frequency = 0.05;
  int block_slots = 1;  // consecutive slots sharing one drawn level
};

struct WeatherConfig {
  double mean_temperature = 11.0;
  double annual_amplitude = 7.0;
  double daily_amplitude = 3.0;
  double noise = 1.0;
  double apparent_offset = -2.0;
  double mean_humidity = 0.75;
  double humidity_amplitude = 0.1;
};

struct SynthConfig {
  Date start = make_date(2013, 1, 1);
  int days = 120;
  int aggregation_count = 1100;
  // Planted coefficients keyed by raw feature name (see regression/features.hpp);
  // absent names are zero.
  double intercept = 40.0;
  std::map<std::string, double> coefficients;
  double noise_sigma = 1.0;
  // Price-independent level used for the warm-up week before lags exist.
  double warmup_level = 100.0;
  double warmup_daily_amplitude = 20.0;
  PriceLevels prices;
  WeatherConfig weather;
  std::vector<Date> holidays;

  void validate() const;
  static SynthConfig defaults();
};

SynthConfig read_synth_config(const std::filesystem::path& path);

MeterSeries synthesize(const SynthConfig& config, std::uint64_t seed);

// Per-household series sharing weather and prices: a household scale factor
// times the aggregate plus idiosyncratic noise, floored at zero.
std::vector<MeterSeries> synthesize_households(const SynthConfig& config, int households,
                                               double idiosyncratic_sigma, std::uint64_t seed);

}  // namespace tariffopt::data
