#include "tariffopt/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "tariffopt/error.hpp"
#include "tariffopt/svg.hpp"
#include "tariffopt/version.hpp"

namespace tariffopt::report {

namespace fs = std::filesystem;

namespace {

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2"};
const char* const kWeekdays[] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const fs::path& dir, const std::string& name, const std::string& content,
                std::vector<std::string>& written) {
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << content;
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
  written.push_back(name);
}

std::pair<double, double> padded(double lo, double hi) {
  const double pad = hi > lo ? 0.05 * (hi - lo) : std::max(1.0, std::abs(lo) * 0.05);
  return {lo - pad, hi + pad};
}

std::string ecdf_csv_and_plot(const std::vector<ProfitDistribution>& dists, const std::string& title,
                              const std::string& xlabel, std::string& svg) {
  std::string csv = "label,value,cumulative_probability\n";
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  std::vector<std::vector<std::pair<double, double>>> curves;
  for (const auto& d : dists) {
    curves.push_back(experiments::weighted_ecdf(d.profits, d.probabilities));
    for (const auto& [v, c] : curves.back()) {
      csv += d.label + "," + num(v) + "," + num(c) + "\n";
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  SvgPlot plot(640, 420, title);
  const auto [x0, x1] = padded(lo, hi);
  plot.set_x_range(x0, x1);
  plot.set_y_range(0.0, 1.0);
  plot.set_labels(xlabel, "cumulative probability");
  std::vector<std::pair<std::string, std::string>> legend;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    std::vector<double> x{x0}, y{0.0};
    for (const auto& [v, c] : curves[i]) {
      x.push_back(v);
      y.push_back(c);
    }
    x.push_back(x1);
    y.push_back(1.0);
    const std::string color = kPalette[i % 7];
    plot.step(x, y, color);
    legend.emplace_back(dists[i].label, color);
  }
  plot.legend(legend);
  svg = plot.render();
  return csv;
}

std::string sweep_name(std::size_t index, const experiments::SweepResult& s) {
  return "sweep_" + std::to_string(index) + "_" + optimizer::to_string(s.regulation);
}

void write_sweep_named(const fs::path& dir, const std::string& stem, const experiments::SweepResult& sweep,
                       std::vector<std::string>& written) {
  if (sweep.points.empty()) throw Error(ErrorCode::IoError, "empty beta-shift sweep, nothing to write");
  std::string csv =
      "beta_shift,average_price,expected_profit,cvar,profit_min,profit_q10,profit_q25,profit_median,profit_q75,"
      "profit_q90,profit_max,reasonable_price\n";
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  double plo = lo, phi = -lo;
  for (const auto& p : sweep.points) {
    const auto& q = p.profit;
    csv += num(p.beta_shift) + "," + num(p.average_price) + "," + num(p.expected_profit) + "," + num(p.cvar) + "," +
           num(q.min) + "," + num(q.q10) + "," + num(q.q25) + "," + num(q.median) + "," + num(q.q75) + "," +
           num(q.q90) + "," + num(q.max) + "," + (p.reasonable_price ? "1" : "0") + "\n";
    lo = std::min(lo, q.min);
    hi = std::max(hi, q.max);
    plo = std::min(plo, p.average_price);
    phi = std::max(phi, p.average_price);
  }
  write_file(dir, stem + ".csv", csv, written);

  const auto n = sweep.points.size();
  SvgPlot violin(640, 420, "Profit distribution by beta shift (" + optimizer::to_string(sweep.regulation) + ")");
  violin.set_x_range(-0.5, static_cast<double>(n) - 0.5);
  const auto [y0, y1] = padded(lo, hi);
  violin.set_y_range(y0, y1);
  violin.set_labels("beta shift", "profit (GBP)");
  std::vector<std::pair<double, std::string>> cats;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& q = sweep.points[i].profit;
    const double x = static_cast<double>(i);
    violin.segment(x, q.min, x, q.max, "#444");
    violin.rect(x - 0.3, q.q10, x + 0.3, q.q90, "#c6dbef", "#444");
    violin.rect(x - 0.18, q.q25, x + 0.18, q.q75, "#6baed6", "#444");
    violin.segment(x - 0.3, q.median, x + 0.3, q.median, "#08306b", 2.0);
    violin.marker(x, sweep.points[i].expected_profit, "#d62728", 2.5);
    cats.emplace_back(x, fmt(sweep.points[i].beta_shift));
  }
  violin.x_categories(cats);
  violin.legend({{"q10-q90", "#c6dbef"}, {"q25-q75", "#6baed6"}, {"expected", "#d62728"}});
  write_file(dir, stem + "_profit.svg", violin.render(), written);

  SvgPlot price(640, 420, "Average retail price by beta shift (" + optimizer::to_string(sweep.regulation) + ")");
  std::vector<double> xs, ys;
  for (const auto& p : sweep.points) {
    xs.push_back(p.beta_shift);
    ys.push_back(p.average_price);
  }
  const auto [px0, px1] = padded(xs.front(), xs.back());
  price.set_x_range(px0, px1);
  const auto [py0, py1] = padded(plo, phi);
  price.set_y_range(py0, py1);
  price.set_labels("beta shift", "average price (p/kWh)");
  price.polyline(xs, ys, kPalette[0]);
  for (std::size_t i = 0; i < xs.size(); ++i) price.marker(xs[i], ys[i], kPalette[0]);
  write_file(dir, stem + "_price.svg", price.render(), written);
}

}  // namespace

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

void write_frontier(const fs::path& dir, const experiments::FrontierResult& frontier, std::vector<std::string>& written) {
  if (frontier.points.empty()) throw Error(ErrorCode::IoError, "empty frontier, nothing to write");
  std::string csv = "chi,expected_profit,cvar\n";
  std::vector<double> xs, ys;
  for (const auto& p : frontier.points) {
    csv += num(p.chi) + "," + num(p.expected_profit) + "," + num(p.cvar) + "\n";
    xs.push_back(p.cvar);
    ys.push_back(p.expected_profit);
  }
  write_file(dir, "frontier.csv", csv, written);
  SvgPlot plot(640, 420, "Efficient frontier");
  const auto [x0, x1] = padded(*std::min_element(xs.begin(), xs.end()), *std::max_element(xs.begin(), xs.end()));
  const auto [y0, y1] = padded(*std::min_element(ys.begin(), ys.end()), *std::max_element(ys.begin(), ys.end()));
  plot.set_x_range(x0, x1);
  plot.set_y_range(y0, y1);
  plot.set_labels("CVaR (GBP)", "expected profit (GBP)");
  plot.polyline(xs, ys, kPalette[0]);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    plot.marker(xs[i], ys[i], kPalette[0]);
    plot.text(xs[i], ys[i], " chi=" + fmt(frontier.points[i].chi), "start", 9);
  }
  write_file(dir, "frontier.svg", plot.render(), written);
}

void write_grid(const fs::path& dir, const experiments::GridResult& grid, std::vector<std::string>& written) {
  if (grid.cells.empty()) throw Error(ErrorCode::IoError, "empty contract grid, nothing to write");
  std::string csv = "pB_price,ppa_price,pB_fraction,ppa_fraction\n";
  for (const auto& c : grid.cells) {
    csv += num(c.pB_price) + "," + num(c.ppa_price) + "," + num(c.pB_fraction) + "," + num(c.ppa_fraction) + "\n";
  }
  write_file(dir, "grid.csv", csv, written);
  const auto nb = grid.pB_prices.size(), np = grid.ppa_prices.size();
  for (int which = 0; which < 2; ++which) {
    SvgPlot plot(520, 460, which == 0 ? "Forward contract fraction (chi=" + fmt(grid.chi) + ")"
                                      : "PPA contract fraction (chi=" + fmt(grid.chi) + ")");
    plot.set_x_range(-0.5, static_cast<double>(np) - 0.5);
    plot.set_y_range(-0.5, static_cast<double>(nb) - 0.5);
    plot.set_labels("PPA price index", "forward price index");
    for (std::size_t i = 0; i < nb; ++i) {
      for (std::size_t j = 0; j < np; ++j) {
        const auto& c = grid.at(i, j);
        const double v = which == 0 ? c.pB_fraction : c.ppa_fraction;
        const double x = static_cast<double>(j), y = static_cast<double>(i);
        plot.rect(x - 0.5, y - 0.5, x + 0.5, y + 0.5, heat_color(v), "#ffffff");
        plot.text(x, y - 0.05, fmt(std::round(v * 1000.0) / 10.0) + "%", "middle", 10);
      }
    }
    std::vector<std::pair<double, std::string>> cats;
    for (std::size_t j = 0; j < np; ++j) cats.emplace_back(static_cast<double>(j), fmt(grid.ppa_prices[j]));
    plot.x_categories(cats);
    write_file(dir, which == 0 ? "grid_pB.svg" : "grid_ppa.svg", plot.render(), written);
  }
}

void write_sweep(const fs::path& dir, const experiments::SweepResult& sweep, std::vector<std::string>& written) {
  write_sweep_named(dir, sweep_name(0, sweep), sweep, written);
}

void write_manifest(const fs::path& dir, const ReportInputs& inputs, const std::vector<std::string>& written) {
  nlohmann::ordered_json m;
  m["tool"] = "tariff-opt";
  m["version"] = std::string(version());
  m["config_hash"] = hex64(fnv1a(inputs.config));
  m["seed"] = inputs.seed;
  auto files = nlohmann::ordered_json::array();
  for (const auto& name : written) {
    std::ifstream in(dir / name, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    const auto bytes = ss.str();
    files.push_back({{"name", name}, {"bytes", bytes.size()}, {"fnv1a", hex64(fnv1a(bytes))}});
  }
  m["files"] = files;
  std::vector<std::string> ignored;
  write_file(dir, "manifest.json", m.dump(2) + "\n", ignored);
}

std::vector<std::string> write_report(const fs::path& dir, const ReportInputs& inputs) {
  const bool any = inputs.frontier || inputs.grid || !inputs.sweeps.empty() || !inputs.profit_cdfs.empty() ||
                   (inputs.raw_objectives && inputs.reduced_objectives) || inputs.price_bands;
  if (!any) throw Error(ErrorCode::IoError, "nothing to report");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  std::vector<std::string> written;
  if (inputs.frontier) write_frontier(dir, *inputs.frontier, written);
  if (inputs.grid) write_grid(dir, *inputs.grid, written);
  for (std::size_t i = 0; i < inputs.sweeps.size(); ++i) {
    write_sweep_named(dir, sweep_name(i, inputs.sweeps[i]), inputs.sweeps[i], written);
  }
  if (!inputs.profit_cdfs.empty()) {
    std::string svg;
    const auto csv = ecdf_csv_and_plot(inputs.profit_cdfs, "Profit distribution", "profit (GBP)", svg);
    write_file(dir, "profit_cdf.csv", csv, written);
    write_file(dir, "profit_cdf.svg", svg, written);
  }
  if (inputs.raw_objectives && inputs.reduced_objectives) {
    std::string svg;
    const auto csv = ecdf_csv_and_plot({*inputs.raw_objectives, *inputs.reduced_objectives},
                                       "Deterministic objective, raw vs reduced", "objective (GBP)", svg);
    write_file(dir, "reduction_ecdf.csv", csv, written);
    write_file(dir, "reduction_ecdf.svg", svg, written);
  }
  if (inputs.price_bands) {
    const auto& b = *inputs.price_bands;
    std::string csv = "weekday,slot,mean,low,high\n";
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t d = 0; d < 7; ++d) {
      if (!b.present[d]) continue;
      for (std::size_t s = 0; s < kSlotsPerDay; ++s) {
        csv += std::string(b.by_weekday ? kWeekdays[d] : "all") + "," + std::to_string(s) + "," + num(b.mean[d][s]) +
               "," + num(b.low[d][s]) + "," + num(b.high[d][s]) + "\n";
        lo = std::min(lo, b.mean[d][s]);
        hi = std::max(hi, b.mean[d][s]);
      }
    }
    write_file(dir, "price_bands.csv", csv, written);
    SvgPlot plot(720, 440, "Mean retail price by half-hour");
    plot.set_x_range(0.0, kSlotsPerDay - 1.0);
    const auto [y0, y1] = padded(lo, hi);
    plot.set_y_range(y0, y1);
    plot.set_labels("half-hour of day", "retail price (p/kWh)");
    std::vector<std::pair<std::string, std::string>> legend;
    for (std::size_t d = 0; d < 7; ++d) {
      if (!b.present[d]) continue;
      std::vector<double> xs, ys;
      for (std::size_t s = 0; s < kSlotsPerDay; ++s) {
        xs.push_back(static_cast<double>(s));
        ys.push_back(b.mean[d][s]);
      }
      plot.polyline(xs, ys, kPalette[d]);
      legend.emplace_back(b.by_weekday ? kWeekdays[d] : "all days", kPalette[d]);
    }
    plot.legend(legend);
    write_file(dir, "price_bands.svg", plot.render(), written);
  }
  write_manifest(dir, inputs, written);
  written.push_back("manifest.json");
  return written;
}

double CsvTable::number(std::size_t row, std::string_view column) const {
  const auto it = std::find(header.begin(), header.end(), column);
  if (it == header.end()) throw Error(ErrorCode::MissingColumn, "column '" + std::string(column) + "' not found");
  const auto& cell = rows.at(row).at(static_cast<std::size_t>(it - header.begin()));
  return std::stod(cell);
}

CsvTable read_csv_table(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (std::getline(in, line)) t.header = split(line);
  while (std::getline(in, line)) {
    if (!line.empty()) t.rows.push_back(split(line));
  }
  return t;
}

}  // namespace tariffopt::report
