#include "tariffopt/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "tariffopt/error.hpp"

namespace tariffopt::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  for (auto& f : out) {
    if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<bool> parse_bool(std::string_view s) {
  if (s == "1" || s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "0" || s == "false" || s == "False" || s == "FALSE" || s.empty()) return false;
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  // Prefer the shortest representation that still round-trips.
  for (int p = 1; p <= 17; ++p) {
    char tmp[32];
    std::snprintf(tmp, sizeof tmp, "%.*g", p, v);
    if (std::strtod(tmp, nullptr) == v) return tmp;
  }
  return buf;
}

std::string record_problem(const MeterRecord& r) {
  if (!std::isfinite(r.demand) || r.demand < 0.0) return "demand must be >= 0";
  if (!std::isfinite(r.price) || r.price <= 0.0) return "price must be > 0";
  if (!std::isfinite(r.humidity) || r.humidity < 0.0 || r.humidity > 1.0) return "humidity outside [0,1]";
  if (!std::isfinite(r.temperature) || !std::isfinite(r.apparent_temperature)) return "non-finite temperature";
  if (!r.timestamp.on_slot_boundary()) return "timestamp not on a half-hour boundary";
  return {};
}

std::string join_rows(const std::vector<std::string>& items) {
  std::string out;
  const std::size_t shown = std::min<std::size_t>(items.size(), 20);
  for (std::size_t i = 0; i < shown; ++i) {
    if (i) out += "; ";
    out += items[i];
  }
  if (items.size() > shown) out += "; ... (" + std::to_string(items.size() - shown) + " more)";
  return out;
}

template <typename T>
void put(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error(ErrorCode::IoError, "truncated binary series");
  return v;
}

constexpr char kMagic[4] = {'T', 'O', 'M', 'S'};
constexpr std::uint32_t kBinaryVersion = 1;

}  // namespace

MeterSeries::MeterSeries(std::vector<MeterRecord> records, int aggregation_count,
                         std::vector<std::size_t> imputed_rows)
    : records_(std::move(records)), aggregation_count_(aggregation_count), imputed_(std::move(imputed_rows)) {
  if (aggregation_count_ < 1) throw Error(ErrorCode::InvalidConfig, "aggregation_count must be >= 1");
  std::vector<std::string> bad;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto problem = record_problem(records_[i]);
    if (!problem.empty()) bad.push_back("record " + std::to_string(i) + ": " + problem);
  }
  if (!bad.empty()) throw Error(ErrorCode::InvalidRecord, join_rows(bad));
  std::vector<std::string> gaps;
  for (std::size_t i = 1; i < records_.size(); ++i) {
    const auto step = slots_between(records_[i - 1].timestamp, records_[i].timestamp);
    if (step <= 0) {
      throw Error(ErrorCode::NonMonotoneTime, "record " + std::to_string(i) + " at " +
                                                  records_[i].timestamp.iso() + " does not follow " +
                                                  records_[i - 1].timestamp.iso());
    }
    if (step > 1) {
      gaps.push_back(records_[i - 1].timestamp.plus_slots(1).iso() + " to " +
                     records_[i].timestamp.plus_slots(-1).iso());
    }
  }
  if (!gaps.empty()) throw Error(ErrorCode::TimestampGap, "missing slots " + join_rows(gaps));
  for (auto idx : imputed_) {
    if (idx >= records_.size()) throw Error(ErrorCode::InvalidConfig, "imputed row index out of range");
  }
}

std::ptrdiff_t MeterSeries::index_of(Timestamp t) const {
  if (records_.empty()) return -1;
  const auto k = slots_between(records_.front().timestamp, t);
  if (k < 0 || static_cast<std::size_t>(k) >= records_.size()) return -1;
  if (records_[static_cast<std::size_t>(k)].timestamp != t) return -1;
  return static_cast<std::ptrdiff_t>(k);
}

void SplitSpec::validate() const {
  for (const auto* r : {&train, &validation, &test}) {
    if (r->last < r->first) throw Error(ErrorCode::InvalidConfig, "split range ends before it starts");
  }
  if (!(train.last < validation.first) || !(validation.last < test.first)) {
    throw Error(ErrorCode::InvalidConfig, "split ranges must be disjoint and ordered train < validation < test");
  }
}

MeterSeries parse_csv(std::string_view text, const CsvSchema& schema, const IngestOptions& options) {
  std::vector<std::string_view> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto nl = text.find('\n', start);
      if (nl == std::string_view::npos) nl = text.size();
      auto line = text.substr(start, nl - start);
      if (!trim(line).empty()) lines.push_back(line);
      start = nl + 1;
    }
  }
  if (lines.empty()) throw Error(ErrorCode::MissingColumn, "CSV has no header row");
  const auto header = split_fields(lines.front());
  auto column = [&](const std::string& name, bool required) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    if (required) throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in header");
    return -1;
  };
  const int c_time = column(schema.timestamp, true);
  const int c_demand = column(schema.demand, true);
  const int c_price = column(schema.price, true);
  const int c_temp = column(schema.temperature, true);
  const int c_app = column(schema.apparent_temperature, true);
  const int c_hum = column(schema.humidity, true);
  const int c_hol = schema.holiday.empty() ? -1 : column(schema.holiday, true);

  std::vector<MeterRecord> records;
  std::vector<std::string> bad;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    const auto row = li + 1;  // 1-based file line number
    const auto f = split_fields(lines[li]);
    auto field = [&](int c) -> std::string_view {
      return c >= 0 && static_cast<std::size_t>(c) < f.size() ? f[static_cast<std::size_t>(c)] : std::string_view{};
    };
    MeterRecord r;
    std::string problem;
    auto num = [&](int c, const std::string& name, double& out) {
      auto v = parse_double(field(c));
      if (!v) {
        if (problem.empty()) problem = "unparseable " + name + " '" + std::string(field(c)) + "'";
      } else {
        out = *v;
      }
    };
    if (auto ts = Timestamp::parse(field(c_time))) {
      r.timestamp = *ts;
    } else {
      problem = "unparseable timestamp '" + std::string(field(c_time)) + "'";
    }
    num(c_demand, schema.demand, r.demand);
    num(c_price, schema.price, r.price);
    num(c_temp, schema.temperature, r.temperature);
    num(c_app, schema.apparent_temperature, r.apparent_temperature);
    num(c_hum, schema.humidity, r.humidity);
    if (c_hol >= 0) {
      if (auto h = parse_bool(field(c_hol))) {
        r.holiday = *h;
      } else if (problem.empty()) {
        problem = "unparseable holiday '" + std::string(field(c_hol)) + "'";
      }
    }
    if (problem.empty()) problem = record_problem(r);
    if (!problem.empty()) {
      bad.push_back("row " + std::to_string(row) + ": " + problem);
      continue;
    }
    records.push_back(r);
  }
  if (!bad.empty()) throw Error(ErrorCode::InvalidRecord, join_rows(bad));

  for (std::size_t i = 1; i < records.size(); ++i) {
    if (records[i].timestamp <= records[i - 1].timestamp) {
      throw Error(ErrorCode::NonMonotoneTime, "row " + std::to_string(i + 2) + " at " +
                                                  records[i].timestamp.iso() + " does not follow " +
                                                  records[i - 1].timestamp.iso());
    }
  }

  std::vector<MeterRecord> filled;
  std::vector<std::size_t> imputed;
  std::vector<std::string> gaps;
  filled.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (i > 0) {
      const auto& a = records[i - 1];
      const auto& b = records[i];
      const auto step = slots_between(a.timestamp, b.timestamp);
      if (step > 1) {
        const auto missing = step - 1;
        if (options.gap_policy == GapPolicy::Interpolate && missing <= options.max_interpolated_gap) {
          for (std::int64_t k = 1; k < step; ++k) {
            const double w = static_cast<double>(k) / static_cast<double>(step);
            MeterRecord m;
            m.timestamp = a.timestamp.plus_slots(k);
            m.demand = (1 - w) * a.demand + w * b.demand;
            m.price = (1 - w) * a.price + w * b.price;
            m.temperature = (1 - w) * a.temperature + w * b.temperature;
            m.apparent_temperature = (1 - w) * a.apparent_temperature + w * b.apparent_temperature;
            m.humidity = (1 - w) * a.humidity + w * b.humidity;
            m.holiday = a.timestamp.date() == m.timestamp.date() ? a.holiday : b.holiday;
            imputed.push_back(filled.size());
            filled.push_back(m);
          }
        } else {
          gaps.push_back(a.timestamp.plus_slots(1).iso() + " to " + b.timestamp.plus_slots(-1).iso() + " (" +
                         std::to_string(missing) + " slots)");
        }
      }
    }
    filled.push_back(records[i]);
  }
  if (!gaps.empty()) throw Error(ErrorCode::TimestampGap, "missing slots " + join_rows(gaps));
  return MeterSeries(std::move(filled), options.aggregation_count, std::move(imputed));
}

MeterSeries ingest_csv(const std::filesystem::path& path, const CsvSchema& schema, const IngestOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), schema, options);
}

std::string to_csv(const MeterSeries& series) {
  std::string out = "timestamp,demand_kwh,price_p_kwh,temp_c,apparent_temp_c,humidity,holiday\n";
  for (const auto& r : series.records()) {
    out += r.timestamp.iso();
    for (double v : {r.demand, r.price, r.temperature, r.apparent_temperature, r.humidity}) {
      out += ',';
      out += format_double(v);
    }
    out += r.holiday ? ",1\n" : ",0\n";
  }
  return out;
}

void write_csv(const MeterSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << to_csv(series);
}

void write_binary(const MeterSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out.write(kMagic, 4);
  put(out, kBinaryVersion);
  put(out, static_cast<std::int32_t>(series.aggregation_count()));
  put(out, static_cast<std::uint64_t>(series.size()));
  put(out, static_cast<std::uint64_t>(series.imputed_rows().size()));
  for (auto i : series.imputed_rows()) put(out, static_cast<std::uint64_t>(i));
  for (const auto& r : series.records()) {
    put(out, r.timestamp.minutes());
    put(out, r.demand);
    put(out, r.price);
    put(out, r.temperature);
    put(out, r.apparent_temperature);
    put(out, r.humidity);
    put(out, static_cast<std::uint8_t>(r.holiday ? 1 : 0));
  }
}

MeterSeries read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw Error(ErrorCode::IoError, path.string() + " is not a series snapshot");
  const auto version = get<std::uint32_t>(in);
  if (version != kBinaryVersion) throw Error(ErrorCode::IoError, "unsupported snapshot version " + std::to_string(version));
  const auto agg = get<std::int32_t>(in);
  const auto n = get<std::uint64_t>(in);
  const auto n_imp = get<std::uint64_t>(in);
  std::vector<std::size_t> imputed(n_imp);
  for (auto& i : imputed) i = get<std::uint64_t>(in);
  std::vector<MeterRecord> records(n);
  for (auto& r : records) {
    r.timestamp = Timestamp(get<std::int64_t>(in));
    r.demand = get<double>(in);
    r.price = get<double>(in);
    r.temperature = get<double>(in);
    r.apparent_temperature = get<double>(in);
    r.humidity = get<double>(in);
    r.holiday = get<std::uint8_t>(in) != 0;
  }
  return MeterSeries(std::move(records), agg, std::move(imputed));
}

MeterSeries load_series(const std::filesystem::path& path) {
  if (path.extension() == ".bin") return read_binary(path);
  return ingest_csv(path);
}

MeterSeries apply_holidays(const MeterSeries& series, std::span<const Date> holidays) {
  std::vector<MeterRecord> records(series.records().begin(), series.records().end());
  for (auto& r : records) {
    const auto d = r.timestamp.date();
    r.holiday = r.holiday || std::find(holidays.begin(), holidays.end(), d) != holidays.end();
  }
  return MeterSeries(std::move(records), series.aggregation_count(),
                     std::vector<std::size_t>(series.imputed_rows().begin(), series.imputed_rows().end()));
}

std::vector<Date> read_holiday_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  std::vector<Date> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    auto d = parse_date(t);
    if (!d) throw Error(ErrorCode::InvalidRecord, path.string() + ":" + std::to_string(line_no) + ": bad date");
    out.push_back(*d);
  }
  return out;
}

MeterSeries aggregate_households(std::span<const MeterSeries> per_household) {
  if (per_household.empty()) throw Error(ErrorCode::MisalignedSeries, "no households to aggregate");
  const auto& first = per_household.front();
  for (std::size_t h = 1; h < per_household.size(); ++h) {
    const auto& s = per_household[h];
    if (s.size() != first.size()) {
      throw Error(ErrorCode::MisalignedSeries, "household " + std::to_string(h) + " has " +
                                                   std::to_string(s.size()) + " records, expected " +
                                                   std::to_string(first.size()));
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i].timestamp != first[i].timestamp) {
        throw Error(ErrorCode::MisalignedSeries, "household " + std::to_string(h) + " record " +
                                                     std::to_string(i) + " is at " + s[i].timestamp.iso());
      }
    }
  }
  std::vector<MeterRecord> records(first.records().begin(), first.records().end());
  // Sorted summation: the mean is independent of household order.
  std::vector<double> values(per_household.size());
  int households = 0;
  for (const auto& s : per_household) households += s.aggregation_count();
  for (std::size_t i = 0; i < records.size(); ++i) {
    for (std::size_t h = 0; h < per_household.size(); ++h) values[h] = per_household[h][i].demand;
    std::sort(values.begin(), values.end());
    double sum = 0.0;
    for (double v : values) sum += v;
    records[i].demand = sum / static_cast<double>(values.size());
  }
  return MeterSeries(std::move(records), households);
}

}  // namespace tariffopt::data
