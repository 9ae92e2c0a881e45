#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "tariffopt/data.hpp"
#include "tariffopt/error.hpp"
#include "tariffopt/features.hpp"
#include "tariffopt/rng.hpp"

namespace tariffopt::data {

namespace {

struct PlantedTerm {
  regression::RawFeature feature;
  double coefficient;
};

struct PlantedModel {
  std::vector<PlantedTerm> terms;
  std::map<unsigned, double> months;
  int history = 0;
};

PlantedModel planted_model(const SynthConfig& config) {
  PlantedModel m;
  m.history = kSlotsPerDay * 7;
  for (const auto& [name, coef] : config.coefficients) {
    if (name.starts_with("month_")) {
      const int month = std::stoi(name.substr(6));
      if (month < 1 || month > 12) throw Error(ErrorCode::InvalidConfig, "bad month coefficient " + name);
      m.months[static_cast<unsigned>(month)] = coef;
      continue;
    }
    auto f = regression::RawFeature::parse(name);
    if (!f) throw Error(ErrorCode::InvalidConfig, "unknown planted feature '" + name + "'");
    m.history = std::max(m.history, f->required_history());
    m.terms.push_back({*f, coef});
  }
  return m;
}

double price_level(const PriceLevels& p, double u) {
  if (u < p.low_frequency) return p.low;
  if (u < p.low_frequency + p.high_frequency) return p.high;
  return p.normal;
}

}  // namespace

void SynthConfig::validate() const {
  if (days < 1) throw Error(ErrorCode::InvalidConfig, "days must be >= 1");
  if (aggregation_count < 1) throw Error(ErrorCode::InvalidConfig, "aggregation_count must be >= 1");
  if (!(noise_sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "noise sigma must be >= 0");
  if (!(prices.low > 0.0 && prices.normal > 0.0 && prices.high > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "price levels must be positive");
  }
  if (prices.low_frequency < 0.0 || prices.high_frequency < 0.0 ||
      prices.low_frequency + prices.high_frequency > 1.0) {
    throw Error(ErrorCode::InvalidConfig, "price level frequencies must lie in [0,1] and sum to at most 1");
  }
  if (prices.block_slots < 1) throw Error(ErrorCode::InvalidConfig, "price block_slots must be >= 1");
  if (weather.noise < 0.0) throw Error(ErrorCode::InvalidConfig, "weather noise must be >= 0");
  if (auto it = coefficients.find("price"); it != coefficients.end() && it->second > 0.0) {
    throw Error(ErrorCode::InvalidConfig, "planted price coefficient must be <= 0");
  }
  planted_model(*this);
}

SynthConfig SynthConfig::defaults() {
  SynthConfig c;
  c.coefficients = {
      {"price", -0.36},          {"demand_lag_48", 0.35},  {"demand_lag_336", 0.3},
      {"temperature", -0.5},     {"apparent_temp", -0.8},  {"humidity", 4.0},
      {"holiday", 3.0},          {"dow_5", 1.5},           {"dow_6", 2.0},
      {"demand_mean_24h", 0.05},
  };
  return c;
}

MeterSeries synthesize(const SynthConfig& config, std::uint64_t seed) {
  config.validate();
  const PlantedModel model = planted_model(config);
  auto rng = make_rng(seed, RngStream::Synthesis);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);

  const auto n = static_cast<std::size_t>(config.days) * kSlotsPerDay;
  std::vector<MeterRecord> records(n);
  const auto& w = config.weather;
  const double two_pi = 2.0 * std::numbers::pi;
  const double phi = 0.9;
  double ar = 0.0;
  double price = config.prices.normal;
  for (std::size_t t = 0; t < n; ++t) {
    auto& r = records[t];
    const Date date = config.start + std::chrono::days(static_cast<long>(t / kSlotsPerDay));
    const int slot = static_cast<int>(t % kSlotsPerDay);
    r.timestamp = Timestamp::from_date_slot(date, slot);
    const double season = -std::cos(two_pi * (day_of_year(date) - 15) / 365.0);
    const double diurnal = std::sin(two_pi * (slot / static_cast<double>(kSlotsPerDay) - 0.375));
    ar = phi * ar + std::sqrt(1.0 - phi * phi) * w.noise * normal(rng);
    r.temperature = w.mean_temperature - w.annual_amplitude * -season + w.daily_amplitude * diurnal + ar;
    r.apparent_temperature = r.temperature + w.apparent_offset + 0.3 * w.noise * normal(rng);
    r.humidity = std::clamp(w.mean_humidity + w.humidity_amplitude * -season - 0.02 * diurnal +
                                0.03 * normal(rng),
                            0.0, 1.0);
    if (t % static_cast<std::size_t>(config.prices.block_slots) == 0) price = price_level(config.prices, uniform(rng));
    r.price = price;
    r.holiday = std::find(config.holidays.begin(), config.holidays.end(), date) != config.holidays.end();
  }

  // Demand is generated forward in time; every planted term looks back at
  // least one day, so each slot only reads demand that already exists.
  const auto warmup = std::min(n, static_cast<std::size_t>(model.history));
  for (std::size_t t = 0; t < warmup; ++t) {
    const int slot = static_cast<int>(t % kSlotsPerDay);
    records[t].demand = config.warmup_level +
                        config.warmup_daily_amplitude *
                            std::sin(two_pi * (slot / static_cast<double>(kSlotsPerDay) - 0.3)) +
                        config.noise_sigma * normal(rng);
    if (records[t].demand < 0.0) {
      throw Error(ErrorCode::InvalidConfig, "warm-up demand went negative at " + records[t].timestamp.iso());
    }
  }
  const std::span<const MeterRecord> view(records);
  for (std::size_t t = warmup; t < n; ++t) {
    double d = config.intercept;
    for (const auto& term : model.terms) d += term.coefficient * regression::evaluate(term.feature, view, t);
    if (auto it = model.months.find(month_of(records[t].timestamp.date())); it != model.months.end()) {
      d += it->second;
    }
    d += config.noise_sigma * normal(rng);
    if (d < 0.0) {
      throw Error(ErrorCode::InvalidConfig, "planted model produced negative demand at " + records[t].timestamp.iso());
    }
    records[t].demand = d;
  }
  return MeterSeries(std::move(records), config.aggregation_count);
}

std::vector<MeterSeries> synthesize_households(const SynthConfig& config, int households,
                                               double idiosyncratic_sigma, std::uint64_t seed) {
  if (households < 1) throw Error(ErrorCode::InvalidConfig, "households must be >= 1");
  if (!(idiosyncratic_sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "idiosyncratic sigma must be >= 0");
  const MeterSeries base = synthesize(config, seed);
  std::vector<MeterSeries> out;
  out.reserve(static_cast<std::size_t>(households));
  for (int h = 0; h < households; ++h) {
    auto rng = make_rng(seed, RngStream::Households, static_cast<std::uint64_t>(h));
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> scale_dist(0.5, 1.5);
    const double scale = scale_dist(rng);
    std::vector<MeterRecord> records(base.records().begin(), base.records().end());
    for (auto& r : records) r.demand = std::max(0.0, scale * r.demand + idiosyncratic_sigma * normal(rng));
    out.emplace_back(std::move(records), 1);
  }
  return out;
}

}  // namespace tariffopt::data
