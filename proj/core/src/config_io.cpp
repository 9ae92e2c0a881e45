#include "tariffopt/config_io.hpp"

#include <fstream>
#include <sstream>

#include <toml.hpp>

#include "tariffopt/error.hpp"

namespace tariffopt::io {

namespace fs = std::filesystem;

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json from_toml(const toml::node& node) {
  if (const auto* t = node.as_table()) {
    Json out = Json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = from_toml(v);
    return out;
  }
  if (const auto* a = node.as_array()) {
    Json out = Json::array();
    for (const auto& v : *a) out.push_back(from_toml(v));
    return out;
  }
  if (const auto* v = node.as_string()) return v->get();
  if (const auto* v = node.as_integer()) return v->get();
  if (const auto* v = node.as_floating_point()) return v->get();
  if (const auto* v = node.as_boolean()) return v->get();
  if (const auto* v = node.as_date()) {
    return format_date(make_date(v->get().year, v->get().month, v->get().day));
  }
  if (const auto* v = node.as_date_time()) {
    const auto& dt = v->get();
    const Date d = make_date(dt.date.year, dt.date.month, dt.date.day);
    return Timestamp(std::chrono::duration_cast<std::chrono::minutes>(d.time_since_epoch()).count() +
                     dt.time.hour * 60 + dt.time.minute)
        .iso();
  }
  throw Error(ErrorCode::InvalidConfig, "unsupported TOML value");
}

template <typename T>
T get_or(const Json& doc, const char* key, T fallback) {
  const auto it = doc.find(key);
  if (it == doc.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::InvalidConfig, std::string("bad value for '") + key + "'");
  }
}

const Json& require(const Json& doc, const char* key) {
  const auto it = doc.find(key);
  if (it == doc.end()) throw Error(ErrorCode::InvalidConfig, std::string("missing key '") + key + "'");
  return *it;
}

Date date_value(const Json& v, const char* what) {
  if (!v.is_string()) throw Error(ErrorCode::InvalidConfig, std::string(what) + ": expected a date string");
  const auto d = parse_date(v.get<std::string>());
  if (!d) throw Error(ErrorCode::InvalidConfig, std::string(what) + ": bad date '" + v.get<std::string>() + "'");
  return *d;
}

Timestamp timestamp_value(const Json& v, const char* what) {
  if (!v.is_string()) throw Error(ErrorCode::InvalidConfig, std::string(what) + ": expected a timestamp string");
  const auto s = v.get<std::string>();
  if (auto t = Timestamp::parse(s)) return *t;
  if (auto d = parse_date(s)) return Timestamp::from_date_slot(*d, 0);
  throw Error(ErrorCode::InvalidConfig, std::string(what) + ": bad timestamp '" + s + "'");
}

Json vec(const Eigen::VectorXd& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

Eigen::VectorXd vec_from(const Json& v, const char* what) {
  if (!v.is_array()) throw Error(ErrorCode::InvalidConfig, std::string(what) + ": expected an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw Error(ErrorCode::InvalidConfig, std::string(what) + ": non-numeric entry");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Json range_json(const DateRange& r) { return {{"first", format_date(r.first)}, {"last", format_date(r.last)}}; }

DateRange range_from(const Json& v, const char* what) {
  return {date_value(require(v, "first"), what), date_value(require(v, "last"), what)};
}

Json fit_json(const regression::RegressionFit& f) {
  return {{"column_names", f.column_names},
          {"coefficients", vec(f.beta)},
          {"standard_errors", vec(f.standard_errors)},
          {"sigma2_eps", f.sigma2_eps},
          {"price_index", f.price_index},
          {"rows", f.rows},
          {"condition_number", f.condition_number},
          {"r2_train", f.r2_train},
          {"standardization",
           {{"ddof", f.standardization.ddof},
            {"mean", vec(f.standardization.mean)},
            {"scale", vec(f.standardization.scale)}}}};
}

regression::RegressionFit fit_from(const Json& j) {
  regression::RegressionFit f;
  f.column_names = require(j, "column_names").get<std::vector<std::string>>();
  f.beta = vec_from(require(j, "coefficients"), "coefficients");
  f.standard_errors = vec_from(require(j, "standard_errors"), "standard_errors");
  f.sigma2_eps = require(j, "sigma2_eps").get<double>();
  f.price_index = require(j, "price_index").get<Eigen::Index>();
  f.rows = get_or<Eigen::Index>(j, "rows", 0);
  f.condition_number = get_or(j, "condition_number", 0.0);
  f.r2_train = get_or(j, "r2_train", 0.0);
  const auto& s = require(j, "standardization");
  f.standardization.ddof = get_or(s, "ddof", 1);
  f.standardization.mean = vec_from(require(s, "mean"), "standardization.mean");
  f.standardization.scale = vec_from(require(s, "scale"), "standardization.scale");
  const auto k = static_cast<std::size_t>(f.beta.size());
  if (f.column_names.size() != k || static_cast<std::size_t>(f.standard_errors.size()) != k ||
      f.price_index >= f.beta.size()) {
    throw Error(ErrorCode::SchemaMismatch, "fit coefficients do not match column names");
  }
  return f;
}

}  // namespace

Json parse_toml(std::string_view text) {
  try {
    return from_toml(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw Error(ErrorCode::InvalidConfig, msg.str());
  }
}

Json read_document(const fs::path& path) {
  const auto text = read_text(path);
  if (path.extension() == ".json") {
    try {
      return Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
  }
  return parse_toml(text);
}

void write_json(const fs::path& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << doc.dump(2) << "\n";
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

// ---------------------------------------------------------------------------

data::SplitSpec split_from_json(const Json& doc) {
  data::SplitSpec s{range_from(require(doc, "train"), "train"), range_from(require(doc, "validation"), "validation"),
                    range_from(require(doc, "test"), "test")};
  s.validate();
  return s;
}

Json to_json(const data::SplitSpec& split) {
  return {{"train", range_json(split.train)},
          {"validation", range_json(split.validation)},
          {"test", range_json(split.test)}};
}

data::SplitSpec read_split(const fs::path& path) { return split_from_json(read_document(path)); }

data::SynthConfig synth_from_json(const Json& doc) {
  auto c = data::SynthConfig::defaults();
  if (doc.contains("start")) c.start = date_value(doc["start"], "start");
  c.days = get_or(doc, "days", c.days);
  c.aggregation_count = get_or(doc, "aggregation_count", c.aggregation_count);
  c.intercept = get_or(doc, "intercept", c.intercept);
  c.noise_sigma = get_or(doc, "noise_sigma", c.noise_sigma);
  c.warmup_level = get_or(doc, "warmup_level", c.warmup_level);
  c.warmup_daily_amplitude = get_or(doc, "warmup_daily_amplitude", c.warmup_daily_amplitude);
  if (doc.contains("coefficients")) {
    c.coefficients.clear();
    for (const auto& [k, v] : doc["coefficients"].items()) {
      if (!v.is_number()) throw Error(ErrorCode::InvalidConfig, "coefficient '" + k + "' is not a number");
      c.coefficients[k] = v.get<double>();
    }
  }
  if (doc.contains("prices")) {
    const auto& p = doc["prices"];
    c.prices.low = get_or(p, "low", c.prices.low);
    c.prices.normal = get_or(p, "normal", c.prices.normal);
    c.prices.high = get_or(p, "high", c.prices.high);
    c.prices.low_frequency = get_or(p, "low_frequency", c.prices.low_frequency);
    c.prices.high_frequency = get_or(p, "high_frequency", c.prices.high_frequency);
    c.prices.block_slots = get_or(p, "block_slots", c.prices.block_slots);
  }
  if (doc.contains("weather")) {
    const auto& w = doc["weather"];
    c.weather.mean_temperature = get_or(w, "mean_temperature", c.weather.mean_temperature);
    c.weather.annual_amplitude = get_or(w, "annual_amplitude", c.weather.annual_amplitude);
    c.weather.daily_amplitude = get_or(w, "daily_amplitude", c.weather.daily_amplitude);
    c.weather.noise = get_or(w, "noise", c.weather.noise);
    c.weather.apparent_offset = get_or(w, "apparent_offset", c.weather.apparent_offset);
    c.weather.mean_humidity = get_or(w, "mean_humidity", c.weather.mean_humidity);
    c.weather.humidity_amplitude = get_or(w, "humidity_amplitude", c.weather.humidity_amplitude);
  }
  if (doc.contains("holidays")) {
    for (const auto& h : doc["holidays"]) c.holidays.push_back(date_value(h, "holidays"));
  }
  c.validate();
  return c;
}

}  // namespace tariffopt::io

namespace tariffopt::data {

SynthConfig read_synth_config(const std::filesystem::path& path) {
  return io::synth_from_json(io::read_document(path));
}

}  // namespace tariffopt::data

namespace tariffopt::io {

optimizer::ProblemSpec problem_from_json(const Json& doc) {
  optimizer::ProblemSpec s;
  s.horizon = get_or(doc, "horizon", s.horizon);
  s.slots_per_day = get_or(doc, "slots_per_day", s.slots_per_day);
  if (doc.contains("start") && !doc["start"].is_null()) s.start = timestamp_value(doc["start"], "start");
  s.lambdaE_bar = get_or(doc, "lambdaE_bar", s.lambdaE_bar);
  s.gamma = get_or(doc, "gamma", s.gamma);
  s.pB_price = get_or(doc, "pB_price", s.pB_price);
  s.pB_max = get_or(doc, "pB_max", s.pB_max);
  s.ppa_price = get_or(doc, "ppa_price", s.ppa_price);
  s.ppa_max = get_or(doc, "ppa_max", s.ppa_max);
  s.alpha = get_or(doc, "alpha", s.alpha);
  s.chi = get_or(doc, "chi", s.chi);
  if (doc.contains("price_regulation")) {
    s.price_regulation = optimizer::parse_price_regulation(get_or<std::string>(doc, "price_regulation", "indexed"));
  }
  if (doc.contains("baseline_demand")) {
    const auto& b = doc["baseline_demand"];
    if (b.is_number()) {
      s.baseline_demand = Eigen::VectorXd::Constant(s.horizon, b.get<double>());
    } else {
      s.baseline_demand = vec_from(b, "baseline_demand");
      if (!doc.contains("horizon")) s.horizon = static_cast<int>(s.baseline_demand.size());
    }
  }
  s.validate();
  return s;
}

Json to_json(const optimizer::ProblemSpec& s) {
  Json j;
  j["horizon"] = s.horizon;
  j["slots_per_day"] = s.slots_per_day;
  j["start"] = s.start ? Json(s.start->iso()) : Json(nullptr);
  j["lambdaE_bar"] = s.lambdaE_bar;
  j["gamma"] = s.gamma;
  j["pB_price"] = s.pB_price;
  j["pB_max"] = s.pB_max;
  j["ppa_price"] = s.ppa_price;
  j["ppa_max"] = s.ppa_max;
  j["alpha"] = s.alpha;
  j["chi"] = s.chi;
  j["price_regulation"] = optimizer::to_string(s.price_regulation);
  j["baseline_demand"] = vec(s.baseline_demand);
  return j;
}

optimizer::ProblemSpec read_problem_spec(const fs::path& path) { return problem_from_json(read_document(path)); }

// ---------------------------------------------------------------------------

Json to_json(const FitArtifact& a) {
  const auto& t = a.transform;
  Json j;
  j["format"] = "tariffopt-fit";
  j["version"] = 1;
  j["model"] = regression::to_string(a.kind);
  Json spec;
  spec["lag_offsets"] = t.spec.lag_offsets;
  spec["spline_knots"] = t.spec.spline_knots;
  spec["include_interactions"] = t.spec.include_interactions;
  spec["include_price"] = t.spec.include_price;
  Json tr;
  tr["spec"] = spec;
  tr["month_levels"] = t.month_levels;
  tr["centers"] = Json::object();
  for (const auto& [k, v] : t.centers) tr["centers"][k] = v;
  tr["time_origin"] = t.time_origin.iso();
  tr["column_names"] = t.column_names;
  if (t.spline) {
    tr["spline"] = {{"t0", t.spline->span_begin()},         {"t1", t.spline->span_end()},
                    {"knots", t.spline->knots()},            {"coefficients", vec(t.spline->coefficients())},
                    {"clamp_low", t.spline->clamp_low()},    {"clamp_high", t.spline->clamp_high()}};
  } else {
    tr["spline"] = nullptr;
  }
  j["transform"] = tr;
  const auto& m = a.metrics;
  j["metrics"] = {{"mae_train", m.mae_train}, {"rmse_train", m.rmse_train}, {"mae_test", m.mae_test},
                  {"rmse_test", m.rmse_test}, {"r2_train", m.r2},         {"r2_test", m.r2_test}};
  if (a.beta_distribution) {
    j["beta_distribution"] = {{"mean", a.beta_distribution->mean},
                              {"std", a.beta_distribution->std},
                              {"shift", a.beta_distribution->shift},
                              {"truncate_at_zero", a.beta_distribution->truncate_at_zero}};
  } else {
    j["beta_distribution"] = nullptr;
  }
  Json fits = Json::array();
  for (const auto& f : a.fits) fits.push_back(fit_json(f));
  j["fits"] = fits;
  return j;
}

FitArtifact fit_from_json(const Json& j) {
  if (get_or<std::string>(j, "format", "") != "tariffopt-fit") {
    throw Error(ErrorCode::SchemaMismatch, "not a fit file");
  }
  FitArtifact a;
  a.kind = regression::parse_model_kind(require(j, "model").get<std::string>());
  const auto& tr = require(j, "transform");
  const auto& spec = require(tr, "spec");
  a.transform.spec = regression::FeatureSpec::for_kind(a.kind);
  a.transform.spec.lag_offsets = require(spec, "lag_offsets").get<std::vector<int>>();
  a.transform.spec.spline_knots = get_or(spec, "spline_knots", 0);
  a.transform.spec.include_interactions = get_or(spec, "include_interactions", true);
  a.transform.spec.include_price = get_or(spec, "include_price", true);
  a.transform.month_levels = require(tr, "month_levels").get<std::vector<unsigned>>();
  for (const auto& [k, v] : require(tr, "centers").items()) a.transform.centers[k] = v.get<double>();
  a.transform.time_origin = timestamp_value(require(tr, "time_origin"), "time_origin");
  a.transform.column_names = require(tr, "column_names").get<std::vector<std::string>>();
  if (const auto& sp = require(tr, "spline"); !sp.is_null()) {
    a.transform.spline = regression::SplineTrend(
        require(sp, "t0").get<double>(), require(sp, "t1").get<double>(), require(sp, "knots").get<int>(),
        vec_from(require(sp, "coefficients"), "spline.coefficients"), require(sp, "clamp_low").get<double>(),
        require(sp, "clamp_high").get<double>());
  }
  if (const auto it = j.find("metrics"); it != j.end()) {
    a.metrics.mae_train = get_or(*it, "mae_train", 0.0);
    a.metrics.rmse_train = get_or(*it, "rmse_train", 0.0);
    a.metrics.mae_test = get_or(*it, "mae_test", 0.0);
    a.metrics.rmse_test = get_or(*it, "rmse_test", 0.0);
    a.metrics.r2 = get_or(*it, "r2_train", 0.0);
    a.metrics.r2_test = get_or(*it, "r2_test", 0.0);
  }
  if (const auto it = j.find("beta_distribution"); it != j.end() && !it->is_null()) {
    coeff::PriceCoeffDistribution d;
    d.mean = require(*it, "mean").get<double>();
    d.std = require(*it, "std").get<double>();
    d.shift = get_or(*it, "shift", 0.0);
    d.truncate_at_zero = get_or(*it, "truncate_at_zero", false);
    a.beta_distribution = d;
  }
  for (const auto& f : require(j, "fits")) a.fits.push_back(fit_from(f));
  if (a.fits.empty()) throw Error(ErrorCode::SchemaMismatch, "fit file holds no fits");
  for (const auto& f : a.fits) {
    if (f.column_names != a.transform.column_names) {
      throw Error(ErrorCode::SchemaMismatch, "fit columns differ from the transform layout");
    }
  }
  return a;
}

void write_fit(const fs::path& path, const FitArtifact& fit) { write_json(path, to_json(fit)); }

FitArtifact read_fit(const fs::path& path) {
  try {
    return fit_from_json(Json::parse(read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

Json to_json(const scenarios::ScenarioSet& set) {
  Json j;
  j["format"] = "tariffopt-scenarios";
  j["version"] = kScenarioFormatVersion;
  j["horizon"] = set.horizon();
  j["start"] = set.start ? Json(set.start->iso()) : Json(nullptr);
  j["provenance"] = scenarios::to_string(set.provenance);
  j["bandwidth"] = set.bandwidth;
  j["cluster_map"] = set.cluster_map;
  j["representatives"] = set.representatives;
  Json arr = Json::array();
  for (const auto& s : set.scenarios) {
    arr.push_back({{"probability", s.probability}, {"beta", s.beta}, {"pool", vec(s.pool)},
                   {"availability", vec(s.availability)}});
  }
  j["scenarios"] = arr;
  return j;
}

scenarios::ScenarioSet scenarios_from_json(const Json& j) {
  if (get_or<std::string>(j, "format", "") != "tariffopt-scenarios") {
    throw Error(ErrorCode::SchemaMismatch, "not a scenario file");
  }
  if (const int v = require(j, "version").get<int>(); v != kScenarioFormatVersion) {
    throw Error(ErrorCode::SchemaMismatch, "unsupported scenario file version " + std::to_string(v));
  }
  scenarios::ScenarioSet set;
  const auto prov = require(j, "provenance").get<std::string>();
  if (prov == "raw") {
    set.provenance = scenarios::Provenance::Raw;
  } else if (prov == "reduced") {
    set.provenance = scenarios::Provenance::Reduced;
  } else {
    throw Error(ErrorCode::SchemaMismatch, "unknown provenance '" + prov + "'");
  }
  if (const auto& st = require(j, "start"); !st.is_null()) set.start = timestamp_value(st, "start");
  set.bandwidth = get_or(j, "bandwidth", 0.0);
  set.cluster_map = get_or(j, "cluster_map", std::vector<int>{});
  set.representatives = get_or(j, "representatives", std::vector<int>{});
  const auto horizon = require(j, "horizon").get<Eigen::Index>();
  for (const auto& s : require(j, "scenarios")) {
    scenarios::Scenario sc;
    sc.probability = require(s, "probability").get<double>();
    sc.beta = require(s, "beta").get<double>();
    sc.pool = vec_from(require(s, "pool"), "pool");
    sc.availability = vec_from(require(s, "availability"), "availability");
    if (sc.pool.size() != horizon) throw Error(ErrorCode::LengthMismatch, "scenario pool path length != horizon");
    set.scenarios.push_back(std::move(sc));
  }
  set.validate();
  return set;
}

void write_scenarios(const fs::path& path, const scenarios::ScenarioSet& set) { write_json(path, to_json(set)); }

scenarios::ScenarioSet read_scenarios(const fs::path& path) {
  try {
    return scenarios_from_json(Json::parse(read_text(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::SchemaMismatch, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

Json to_json(const optimizer::TariffSolution& sol, bool per_scenario_detail) {
  Json j;
  const double avg = sol.retail_price.size() > 0
                         ? (sol.retail_price * sol.probabilities).sum() / static_cast<double>(sol.retail_price.rows())
                         : 0.0;
  j["summary"] = {{"price_regulation", optimizer::to_string(sol.price_regulation)},
                  {"chi", sol.chi},
                  {"alpha", sol.alpha},
                  {"expected_profit", sol.expected_profit},
                  {"cvar", sol.cvar},
                  {"objective", sol.objective},
                  {"var", sol.eta},
                  {"average_price", avg},
                  {"pB", sol.pB},
                  {"pC_ppa", sol.pC_ppa},
                  {"scenarios", sol.probabilities.size()},
                  {"status", optimizer::to_string(sol.report.status)},
                  {"iterations", sol.report.iterations},
                  {"primal_residual", sol.report.primal_residual},
                  {"dual_residual", sol.report.dual_residual},
                  {"relative_gap", sol.report.relative_gap}};
  j["first_stage"] = {{"lambdaE", vec(sol.lambdaE)}, {"pB", sol.pB}, {"pC_ppa", sol.pC_ppa}, {"eta", sol.eta}};
  if (per_scenario_detail) {
    Json arr = Json::array();
    for (Eigen::Index w = 0; w < sol.probabilities.size(); ++w) {
      arr.push_back({{"probability", sol.probabilities[w]},
                     {"profit", sol.profit_per_scenario[w]},
                     {"s", sol.s.size() > w ? sol.s[w] : 0.0},
                     {"retail_price", vec(sol.retail_price.col(w))},
                     {"demand", vec(sol.demand.col(w))},
                     {"pool_purchase", vec(sol.pool_purchase.col(w))},
                     {"ppa_delivered", vec(sol.ppa_delivered.col(w))}});
    }
    j["scenarios"] = arr;
  }
  return j;
}

}  // namespace tariffopt::io
