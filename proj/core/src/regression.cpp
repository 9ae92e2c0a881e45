#include "tariffopt/regression.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "tariffopt/error.hpp"

namespace tariffopt::regression {

namespace {

const std::vector<int> kSmallLags{48, 336};
const std::vector<int> kLargeLags{48, 96, 144, 192, 240, 288, 336};

constexpr std::string_view kIntercept = "intercept";
constexpr std::string_view kTrend = "trend_spline";

// One design column. Interactions hold the names of their two operands.
struct Column {
  enum class Type { Intercept, Raw, Month, Trend, Interaction };
  Type type = Type::Raw;
  std::string name;
  RawFeature raw;
  unsigned month = 0;
  std::string lhs;
  std::string rhs;
};

std::string month_name(unsigned m) { return "month_" + std::to_string(m); }

Column raw_column(RawFeature::Kind kind, int param = 0) {
  Column c;
  c.type = Column::Type::Raw;
  c.raw = RawFeature{kind, param};
  c.name = c.raw.name();
  return c;
}

struct Layout {
  std::vector<Column> columns;
  // Operand columns referenced by interactions, by name.
  std::map<std::string, Column> operands;
};

Layout full_layout(const FeatureSpec& spec, const std::vector<unsigned>& month_levels) {
  using K = RawFeature::Kind;
  Layout layout;
  auto& cols = layout.columns;
  cols.push_back(Column{Column::Type::Intercept, std::string(kIntercept), {}, 0, {}, {}});
  const bool large = spec.model_kind != ModelKind::Small;
  if (large) cols.push_back(raw_column(K::Temperature));
  cols.push_back(raw_column(K::ApparentTemperature));
  cols.push_back(raw_column(K::Humidity));
  std::vector<Column> lag_columns;
  for (int lag : spec.lag_offsets) {
    lag_columns.push_back(raw_column(K::DemandLag, lag));
    cols.push_back(lag_columns.back());
  }
  if (large) {
    for (int lag : spec.lag_offsets) cols.push_back(raw_column(K::TemperatureLag, lag));
    for (auto k : {K::DemandMin24h, K::DemandMax24h, K::DemandMean24h, K::TemperatureMin24h,
                   K::TemperatureMax24h, K::TemperatureMean24h}) {
      cols.push_back(raw_column(k));
    }
  }
  std::vector<Column> month_columns;
  for (unsigned m : month_levels) {
    Column c;
    c.type = Column::Type::Month;
    c.month = m;
    c.name = month_name(m);
    month_columns.push_back(c);
    cols.push_back(c);
  }
  if (large) {
    for (int d = 1; d <= 6; ++d) cols.push_back(raw_column(K::DayOfWeek, d));
    cols.push_back(raw_column(K::Holiday));
    if (spec.spline_knots > 0) {
      cols.push_back(Column{Column::Type::Trend, std::string(kTrend), {}, 0, {}, {}});
    }
  }
  if (spec.include_price) cols.push_back(raw_column(K::Price));

  if (spec.include_interactions) {
    const Column apparent = raw_column(K::ApparentTemperature);
    auto add = [&](const Column& a, const Column& b) {
      Column c;
      c.type = Column::Type::Interaction;
      c.lhs = a.name;
      c.rhs = b.name;
      c.name = a.name + ":" + b.name;
      layout.operands[a.name] = a;
      layout.operands[b.name] = b;
      cols.push_back(c);
    };
    for (const auto& m : month_columns)
      for (const auto& l : lag_columns) add(m, l);
    for (const auto& m : month_columns) add(m, apparent);
    for (const auto& l : lag_columns) add(l, apparent);
  }
  return layout;
}

double base_value(const Column& c, std::span<const data::MeterRecord> records, std::size_t t,
                  const FeatureTransform& tf) {
  switch (c.type) {
    case Column::Type::Intercept: return 1.0;
    case Column::Type::Raw: return evaluate(c.raw, records, t);
    case Column::Type::Month: return month_of(records[t].timestamp.date()) == c.month ? 1.0 : 0.0;
    case Column::Type::Trend: return (*tf.spline)(trend_time(records[t].timestamp, tf.time_origin));
    case Column::Type::Interaction: break;
  }
  throw Error(ErrorCode::InvalidConfig, "interaction is not a base column");
}

double column_value(const Column& c, const Layout& layout, std::span<const data::MeterRecord> records,
                    std::size_t t, const FeatureTransform& tf) {
  if (c.type != Column::Type::Interaction) return base_value(c, records, t, tf);
  const auto& a = layout.operands.at(c.lhs);
  const auto& b = layout.operands.at(c.rhs);
  return (base_value(a, records, t, tf) - tf.centers.at(c.lhs)) *
         (base_value(b, records, t, tf) - tf.centers.at(c.rhs));
}

Standardization standardize(const Eigen::MatrixXd& X) {
  Standardization s;
  const auto n = X.rows();
  s.mean = n > 0 ? Eigen::VectorXd(X.colwise().mean().transpose()) : Eigen::VectorXd::Zero(X.cols());
  s.scale = Eigen::VectorXd::Zero(X.cols());
  if (n > 1) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      const double ss = (X.col(j).array() - s.mean[j]).square().sum();
      s.scale[j] = std::sqrt(ss / static_cast<double>(n - 1));
    }
  }
  return s;
}

bool is_constant(const Eigen::VectorXd& v) {
  return v.size() == 0 || (v.array() == v[0]).all();
}

std::vector<std::size_t> eligible_rows(const data::MeterSeries& series, int history,
                                       const DateRange* range) {
  std::vector<std::size_t> rows;
  for (std::size_t t = static_cast<std::size_t>(history); t < series.size(); ++t) {
    if (range == nullptr || range->contains(series[t].timestamp)) rows.push_back(t);
  }
  return rows;
}

DesignMatrix layout_rows(const data::MeterSeries& series, const FeatureTransform& tf,
                         const std::vector<std::size_t>& rows) {
  const Layout layout = full_layout(tf.spec, tf.month_levels);
  std::vector<const Column*> chosen;
  for (const auto& name : tf.column_names) {
    auto it = std::find_if(layout.columns.begin(), layout.columns.end(),
                           [&](const Column& c) { return c.name == name; });
    if (it == layout.columns.end()) {
      throw Error(ErrorCode::SchemaMismatch, "column " + name + " not produced by feature spec");
    }
    chosen.push_back(&*it);
  }
  DesignMatrix dm;
  dm.column_names = tf.column_names;
  dm.X.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(chosen.size()));
  dm.y.resize(static_cast<Eigen::Index>(rows.size()));
  const auto records = series.records();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < chosen.size(); ++j) {
      dm.X(r, static_cast<Eigen::Index>(j)) = column_value(*chosen[j], layout, records, rows[i], tf);
    }
    dm.y[r] = records[rows[i]].demand;
    dm.row_times.push_back(records[rows[i]].timestamp);
  }
  for (std::size_t j = 0; j < chosen.size(); ++j) {
    if (chosen[j]->type == Column::Type::Raw && chosen[j]->raw.kind == RawFeature::Kind::Price) {
      dm.price_index = static_cast<Eigen::Index>(j);
    }
  }
  dm.standardization = standardize(dm.X);
  return dm;
}

SplineTrend fit_spline_rows(const data::MeterSeries& series, const std::vector<std::size_t>& rows,
                            Timestamp origin, int knots) {
  std::vector<double> times, values;
  times.reserve(rows.size());
  values.reserve(rows.size());
  for (auto t : rows) {
    times.push_back(trend_time(series[t].timestamp, origin));
    values.push_back(series[t].demand);
  }
  return SplineTrend::fit(times, values, knots);
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Small: return "small";
    case ModelKind::Large: return "large";
    case ModelKind::Combined: return "combined";
  }
  return "large";
}

ModelKind parse_model_kind(std::string_view text) {
  if (text == "small") return ModelKind::Small;
  if (text == "large") return ModelKind::Large;
  if (text == "combined") return ModelKind::Combined;
  throw Error(ErrorCode::InvalidConfig, "unknown model kind '" + std::string(text) + "'");
}

FeatureSpec FeatureSpec::small() {
  return FeatureSpec{ModelKind::Small, kSmallLags, 0, true, true};
}

FeatureSpec FeatureSpec::large() {
  return FeatureSpec{ModelKind::Large, kLargeLags, 6, true, true};
}

FeatureSpec FeatureSpec::combined() {
  auto spec = large();
  spec.model_kind = ModelKind::Combined;
  return spec;
}

FeatureSpec FeatureSpec::for_kind(ModelKind kind) {
  switch (kind) {
    case ModelKind::Small: return small();
    case ModelKind::Large: return large();
    case ModelKind::Combined: return combined();
  }
  return large();
}

void FeatureSpec::validate() const {
  if (lag_offsets.empty()) throw Error(ErrorCode::InvalidConfig, "at least one demand lag is required");
  for (int lag : lag_offsets) {
    if (lag < kSlotsPerDay) {
      throw Error(ErrorCode::InvalidConfig,
                  "lag " + std::to_string(lag) + " is inside the 24h forecast window (must be >= 48)");
    }
  }
  if (spline_knots != 0 && spline_knots < 2) {
    throw Error(ErrorCode::DegenerateKnots, "spline needs at least 2 knots");
  }
}

int FeatureSpec::required_history() const {
  int h = *std::max_element(lag_offsets.begin(), lag_offsets.end());
  if (model_kind != ModelKind::Small) h = std::max(h, kRollingWindowStart);
  return h;
}

DesignMatrix DesignMatrix::select_rows(const std::vector<Eigen::Index>& rows) const {
  DesignMatrix out;
  out.column_names = column_names;
  out.price_index = price_index;
  out.X.resize(static_cast<Eigen::Index>(rows.size()), X.cols());
  out.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.X.row(static_cast<Eigen::Index>(i)) = X.row(rows[i]);
    out.y[static_cast<Eigen::Index>(i)] = y[rows[i]];
    if (!row_times.empty()) out.row_times.push_back(row_times[static_cast<std::size_t>(rows[i])]);
  }
  out.standardization = standardize(out.X);
  return out;
}

std::vector<std::string> feature_groups(const DesignMatrix& dm) {
  auto group_of = [](const std::string& name) -> std::string {
    auto g = [](std::string_view n) -> std::string {
      if (n.starts_with("month_")) return "month";
      if (n.starts_with("demand_lag_")) return "demand_lags";
      if (n.starts_with("temp_lag_")) return "temp_lags";
      if (n.starts_with("dow_")) return "day_of_week";
      return std::string(n);
    };
    const auto colon = name.find(':');
    if (colon == std::string::npos) {
      // Small-model lags are listed individually.
      return name.starts_with("demand_lag_") ? name : g(name);
    }
    return g(std::string_view(name).substr(0, colon)) + ":" + g(std::string_view(name).substr(colon + 1));
  };
  std::vector<std::string> groups;
  for (const auto& name : dm.column_names) {
    auto g = group_of(name);
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  return groups;
}

double trend_time(Timestamp t, Timestamp origin) {
  return static_cast<double>(t.minutes() - origin.minutes()) / (24.0 * 60.0);
}

SplineTrend fit_spline(const data::MeterSeries& series, int knots) {
  if (series.empty()) throw Error(ErrorCode::DegenerateKnots, "empty series");
  std::vector<std::size_t> rows(series.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return fit_spline_rows(series, rows, series.first_timestamp(), knots);
}

SplitDesign build_features(const data::MeterSeries& series, const FeatureSpec& spec,
                           const data::SplitSpec& split) {
  spec.validate();
  split.validate();
  const int history = spec.required_history();
  if (series.size() <= static_cast<std::size_t>(history)) {
    throw Error(ErrorCode::InsufficientHistory, "series has " + std::to_string(series.size()) +
                                                    " rows, needs more than " + std::to_string(history));
  }
  const auto train_rows = eligible_rows(series, history, &split.train);
  if (train_rows.empty()) {
    throw Error(ErrorCode::InsufficientHistory, "no training rows with " + std::to_string(history) +
                                                    " slots of history");
  }

  SplitDesign out;
  FeatureTransform& tf = out.transform;
  tf.spec = spec;
  tf.time_origin = series.first_timestamp();

  std::set<unsigned> months;
  for (auto t : train_rows) months.insert(month_of(series[t].timestamp.date()));
  tf.month_levels.assign(std::next(months.begin()), months.end());

  if (spec.model_kind != ModelKind::Small && spec.spline_knots > 0) {
    std::vector<std::size_t> span_rows;
    for (std::size_t t = 0; t < series.size(); ++t) {
      if (split.train.contains(series[t].timestamp)) span_rows.push_back(t);
    }
    tf.spline = fit_spline_rows(series, span_rows, tf.time_origin, spec.spline_knots);
  }

  // Interaction centers are training means of each operand.
  const Layout layout = full_layout(spec, tf.month_levels);
  for (const auto& [name, col] : layout.operands) {
    double sum = 0.0;
    for (auto t : train_rows) sum += base_value(col, series.records(), t, tf);
    tf.centers[name] = sum / static_cast<double>(train_rows.size());
  }

  // Lay out every candidate column on the training rows, then drop the ones
  // that are constant there (holiday dummy with no holidays, etc).
  for (const auto& c : layout.columns) tf.column_names.push_back(c.name);
  DesignMatrix full = layout_rows(series, tf, train_rows);
  std::vector<std::string> kept;
  for (Eigen::Index j = 0; j < full.cols(); ++j) {
    const auto& name = full.column_names[static_cast<std::size_t>(j)];
    if (name == kIntercept || !is_constant(full.X.col(j))) {
      kept.push_back(name);
    } else if (j == full.price_index) {
      throw Error(ErrorCode::RankDeficient, "price column is constant over the training rows");
    }
  }
  tf.column_names = kept;

  out.train = layout_rows(series, tf, train_rows);
  out.validation = layout_rows(series, tf, eligible_rows(series, history, &split.validation));
  out.test = layout_rows(series, tf, eligible_rows(series, history, &split.test));
  return out;
}

DesignMatrix apply_transform(const data::MeterSeries& series, const FeatureTransform& transform,
                             std::size_t first_row, std::size_t last_row) {
  std::vector<std::size_t> rows;
  const auto history = static_cast<std::size_t>(transform.spec.required_history());
  for (std::size_t t = std::max(first_row, history); t <= last_row && t < series.size(); ++t) rows.push_back(t);
  return layout_rows(series, transform, rows);
}

DesignMatrix apply_transform(const data::MeterSeries& series, const FeatureTransform& transform) {
  if (series.empty()) return layout_rows(series, transform, {});
  return apply_transform(series, transform, 0, series.size() - 1);
}

Eigen::VectorXd RegressionFit::predict(const DesignMatrix& dm) const {
  if (dm.column_names != column_names) {
    throw Error(ErrorCode::SchemaMismatch, "design columns differ from the fitted columns");
  }
  return dm.X * beta;
}

Eigen::VectorXd RegressionFit::baseline(const DesignMatrix& dm) const {
  Eigen::VectorXd out = predict(dm);
  if (price_index >= 0) out -= beta[price_index] * dm.X.col(price_index);
  return out;
}

RegressionFit fit_ols(const DesignMatrix& dm) {
  const auto n = dm.rows();
  const auto k = dm.cols();
  if (k == 0 || n <= k) {
    throw Error(ErrorCode::InsufficientHistory,
                "need more rows than columns (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.X);
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  const double cond = sv[k - 1] > 0.0 ? sv[0] / sv[k - 1] : std::numeric_limits<double>::infinity();
  if (!(cond <= kMaxConditionNumber)) {
    // The weakest right singular vector (in pivoted order) spans the collinearity.
    const Eigen::VectorXd v = svd.matrixV().col(k - 1);
    const auto& perm = qr.colsPermutation().indices();
    std::string names;
    for (Eigen::Index j = 0; j < k; ++j) {
      if (std::abs(v[j]) > 0.1) {
        if (!names.empty()) names += ", ";
        names += dm.column_names[static_cast<std::size_t>(perm[j])];
      }
    }
    throw Error(ErrorCode::RankDeficient, "collinear columns: " + names);
  }

  RegressionFit fit;
  fit.beta = qr.solve(dm.y);
  fit.residuals = dm.y - dm.X * fit.beta;
  fit.sigma2_eps = fit.residuals.squaredNorm() / static_cast<double>(n - k);
  fit.price_index = dm.price_index;
  fit.column_names = dm.column_names;
  fit.standardization = dm.standardization;
  fit.rows = n;
  fit.condition_number = cond;
  {
    const double tss = (dm.y.array() - dm.y.mean()).square().sum();
    fit.r2_train = tss > 0.0 ? 1.0 - fit.residuals.squaredNorm() / tss : 1.0;
  }

  const Eigen::MatrixXd Rinv =
      R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::VectorXd diag_perm = Rinv.rowwise().squaredNorm();
  fit.standard_errors.resize(k);
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index j = 0; j < k; ++j) {
    fit.standard_errors[perm[j]] = std::sqrt(fit.sigma2_eps * diag_perm[j]);
  }
  return fit;
}

ErrorStats error_stats(const Eigen::VectorXd& y, const Eigen::VectorXd& predicted) {
  ErrorStats s;
  if (y.size() == 0) return s;
  const Eigen::ArrayXd e = (y - predicted).array();
  const double n = static_cast<double>(y.size());
  s.mae = e.abs().sum() / n;
  s.rmse = std::sqrt(e.square().sum() / n);
  const double tss = (y.array() - y.mean()).square().sum();
  s.r2 = tss > 0.0 ? 1.0 - e.square().sum() / tss : (e.square().sum() == 0.0 ? 1.0 : 0.0);
  return s;
}

namespace {

FitMetrics combine_metrics(const ErrorStats& train, const ErrorStats& test) {
  FitMetrics m;
  m.mae_train = train.mae;
  m.rmse_train = train.rmse;
  m.r2 = train.r2;
  m.mae_test = test.mae;
  m.rmse_test = test.rmse;
  m.r2_test = test.r2;
  return m;
}

}  // namespace

FitMetrics evaluate(const RegressionFit& fit, const DesignMatrix& dm_test) {
  const Eigen::VectorXd test_pred = fit.predict(dm_test);
  ErrorStats train;
  const double n = static_cast<double>(fit.residuals.size());
  train.mae = fit.residuals.array().abs().sum() / n;
  train.rmse = std::sqrt(fit.residuals.squaredNorm() / n);
  train.r2 = fit.r2_train;
  return combine_metrics(train, error_stats(dm_test.y, test_pred));
}

double standardized_price_impact(const RegressionFit& fit) {
  if (fit.price_index < 0) return 0.0;
  double total = 0.0;
  for (Eigen::Index j = 0; j < fit.beta.size(); ++j) {
    if (fit.column_names[static_cast<std::size_t>(j)] == kIntercept) continue;
    total += std::abs(fit.beta[j] * fit.standardization.scale[j]);
  }
  if (total == 0.0) return 0.0;
  return 100.0 * std::abs(fit.beta[fit.price_index] * fit.standardization.scale[fit.price_index]) / total;
}

Eigen::VectorXd CombinedFit::predict(const DesignMatrix& dm) const {
  Eigen::VectorXd out(dm.rows());
  for (Eigen::Index i = 0; i < dm.rows(); ++i) {
    const auto& f = slots[static_cast<std::size_t>(dm.row_times[static_cast<std::size_t>(i)].slot_of_day())];
    if (dm.column_names != f.column_names) {
      throw Error(ErrorCode::SchemaMismatch, "design columns differ from the fitted columns");
    }
    out[i] = dm.X.row(i).dot(f.beta);
  }
  return out;
}

CombinedFit fit_combined(const DesignMatrix& train) {
  std::array<std::vector<Eigen::Index>, kSlotsPerDay> by_slot;
  for (Eigen::Index i = 0; i < train.rows(); ++i) {
    by_slot[static_cast<std::size_t>(train.row_times[static_cast<std::size_t>(i)].slot_of_day())].push_back(i);
  }
  CombinedFit out;
  for (int s = 0; s < kSlotsPerDay; ++s) {
    const auto& rows = by_slot[static_cast<std::size_t>(s)];
    if (rows.size() <= static_cast<std::size_t>(train.cols())) {
      throw Error(ErrorCode::InsufficientHistory, "slot " + std::to_string(s) + " has " +
                                                      std::to_string(rows.size()) + " rows for " +
                                                      std::to_string(train.cols()) + " columns");
    }
    out.slots[static_cast<std::size_t>(s)] = fit_ols(train.select_rows(rows));
  }
  return out;
}

CombinedFit fit_combined(const data::MeterSeries& series, const FeatureSpec& spec,
                         const data::SplitSpec& split) {
  return fit_combined(build_features(series, spec, split).train);
}

FitMetrics evaluate(const CombinedFit& fit, const DesignMatrix& dm_train, const DesignMatrix& dm_test) {
  return combine_metrics(error_stats(dm_train.y, fit.predict(dm_train)),
                         error_stats(dm_test.y, fit.predict(dm_test)));
}

AblationResult ablate_price(const data::MeterSeries& series, const FeatureSpec& spec,
                            const data::SplitSpec& split) {
  auto run = [&](const FeatureSpec& s) {
    const auto design = build_features(series, s, split);
    if (s.model_kind == ModelKind::Combined) {
      return evaluate(fit_combined(design.train), design.train, design.test);
    }
    return evaluate(fit_ols(design.train), design.test);
  };
  AblationResult out;
  auto with = spec;
  with.include_price = true;
  auto without = spec;
  without.include_price = false;
  out.with_price = run(with);
  out.without_price = run(without);
  return out;
}

}  // namespace tariffopt::regression
