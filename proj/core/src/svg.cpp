#include "tariffopt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace tariffopt::report {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

std::vector<double> ticks(double lo, double hi) {
  std::vector<double> out;
  if (!(hi > lo)) return {lo};
  const double step = nice_step(hi - lo, 5);
  for (double v = std::ceil(lo / step) * step; v <= hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

}  // namespace

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string heat_color(double t) {
  t = std::clamp(t, 0.0, 1.0);
  const int r = static_cast<int>(std::lround(247 - t * (247 - 8)));
  const int g = static_cast<int>(std::lround(251 - t * (251 - 48)));
  const int b = static_cast<int>(std::lround(255 - t * (255 - 107)));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

SvgPlot::SvgPlot(double width, double height, std::string title)
    : width_(width), height_(height), title_(std::move(title)) {}

void SvgPlot::set_x_range(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  x0_ = lo;
  x1_ = hi;
}

void SvgPlot::set_y_range(double lo, double hi) {
  if (!(hi > lo)) {
    lo -= 0.5;
    hi += 0.5;
  }
  y0_ = lo;
  y1_ = hi;
}

void SvgPlot::set_labels(std::string x, std::string y) {
  xlabel_ = std::move(x);
  ylabel_ = std::move(y);
}

double SvgPlot::px(double x) const { return left_ + (x - x0_) / (x1_ - x0_) * (width_ - left_ - right_); }
double SvgPlot::py(double y) const { return height_ - bottom_ - (y - y0_) / (y1_ - y0_) * (height_ - top_ - bottom_); }

void SvgPlot::polyline(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
                       double stroke_width, bool dashed) {
  std::string pts;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
    if (i) pts += ' ';
    pts += fmt(px(x[i])) + "," + fmt(py(y[i]));
  }
  body_.push_back("<polyline fill=\"none\" stroke=\"" + color + "\" stroke-width=\"" + fmt(stroke_width) + "\"" +
                  (dashed ? " stroke-dasharray=\"5,3\"" : "") + " points=\"" + pts + "\"/>");
}

void SvgPlot::step(const std::vector<double>& x, const std::vector<double>& y, const std::string& color) {
  std::vector<double> sx, sy;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0) {
      sx.push_back(x[i]);
      sy.push_back(y[i - 1]);
    }
    sx.push_back(x[i]);
    sy.push_back(y[i]);
  }
  polyline(sx, sy, color);
}

void SvgPlot::marker(double x, double y, const std::string& color, double radius) {
  body_.push_back("<circle cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) + "\" r=\"" + fmt(radius) + "\" fill=\"" +
                  color + "\"/>");
}

void SvgPlot::rect(double x0, double y0, double x1, double y1, const std::string& fill, const std::string& stroke) {
  const double a = px(std::min(x0, x1)), b = px(std::max(x0, x1));
  const double c = py(std::max(y0, y1)), d = py(std::min(y0, y1));
  body_.push_back("<rect x=\"" + fmt(a) + "\" y=\"" + fmt(c) + "\" width=\"" + fmt(b - a) + "\" height=\"" +
                  fmt(d - c) + "\" fill=\"" + fill + "\" stroke=\"" + stroke + "\"/>");
}

void SvgPlot::segment(double x0, double y0, double x1, double y1, const std::string& color, double stroke_width) {
  body_.push_back("<line x1=\"" + fmt(px(x0)) + "\" y1=\"" + fmt(py(y0)) + "\" x2=\"" + fmt(px(x1)) + "\" y2=\"" +
                  fmt(py(y1)) + "\" stroke=\"" + color + "\" stroke-width=\"" + fmt(stroke_width) + "\"/>");
}

void SvgPlot::text(double x, double y, const std::string& body, const std::string& anchor, double size) {
  body_.push_back("<text x=\"" + fmt(px(x)) + "\" y=\"" + fmt(py(y)) + "\" font-size=\"" + fmt(size) +
                  "\" text-anchor=\"" + anchor + "\">" + escape(body) + "</text>");
}

void SvgPlot::legend(const std::vector<std::pair<std::string, std::string>>& entries) { legend_ = entries; }

void SvgPlot::x_categories(const std::vector<std::pair<double, std::string>>& ticks) { x_categories_ = ticks; }

std::string SvgPlot::render() const {
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width_) + "\" height=\"" +
                  fmt(height_) + "\" viewBox=\"0 0 " + fmt(width_) + " " + fmt(height_) +
                  "\" font-family=\"sans-serif\">\n";
  s += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width_) + "\" height=\"" + fmt(height_) + "\" fill=\"white\"/>\n";
  s += "<text x=\"" + fmt(width_ / 2) + "\" y=\"20\" font-size=\"14\" text-anchor=\"middle\">" + escape(title_) +
       "</text>\n";
  const double fx0 = left_, fx1 = width_ - right_, fy0 = top_, fy1 = height_ - bottom_;
  s += "<rect x=\"" + fmt(fx0) + "\" y=\"" + fmt(fy0) + "\" width=\"" + fmt(fx1 - fx0) + "\" height=\"" +
       fmt(fy1 - fy0) + "\" fill=\"none\" stroke=\"#444\"/>\n";
  if (x_categories_.empty()) {
    for (double t : ticks(x0_, x1_)) {
      s += "<line x1=\"" + fmt(px(t)) + "\" y1=\"" + fmt(fy1) + "\" x2=\"" + fmt(px(t)) + "\" y2=\"" + fmt(fy1 + 4) +
           "\" stroke=\"#444\"/>\n";
      s += "<text x=\"" + fmt(px(t)) + "\" y=\"" + fmt(fy1 + 16) + "\" font-size=\"10\" text-anchor=\"middle\">" +
           fmt(t) + "</text>\n";
    }
  } else {
    for (const auto& [t, label] : x_categories_) {
      s += "<text x=\"" + fmt(px(t)) + "\" y=\"" + fmt(fy1 + 16) + "\" font-size=\"10\" text-anchor=\"middle\">" +
           escape(label) + "</text>\n";
    }
  }
  for (double t : ticks(y0_, y1_)) {
    s += "<line x1=\"" + fmt(fx0 - 4) + "\" y1=\"" + fmt(py(t)) + "\" x2=\"" + fmt(fx0) + "\" y2=\"" + fmt(py(t)) +
         "\" stroke=\"#444\"/>\n";
    s += "<text x=\"" + fmt(fx0 - 6) + "\" y=\"" + fmt(py(t) + 3) + "\" font-size=\"10\" text-anchor=\"end\">" +
         fmt(t) + "</text>\n";
  }
  if (!xlabel_.empty()) {
    s += "<text x=\"" + fmt((fx0 + fx1) / 2) + "\" y=\"" + fmt(height_ - 10) +
         "\" font-size=\"12\" text-anchor=\"middle\">" + escape(xlabel_) + "</text>\n";
  }
  if (!ylabel_.empty()) {
    s += "<text x=\"14\" y=\"" + fmt((fy0 + fy1) / 2) + "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         fmt((fy0 + fy1) / 2) + ")\">" + escape(ylabel_) + "</text>\n";
  }
  for (const auto& b : body_) s += b + "\n";
  double ly = fy0 + 14;
  for (const auto& [label, color] : legend_) {
    s += "<rect x=\"" + fmt(fx1 - 130) + "\" y=\"" + fmt(ly - 9) + "\" width=\"10\" height=\"10\" fill=\"" + color +
         "\"/>\n";
    s += "<text x=\"" + fmt(fx1 - 115) + "\" y=\"" + fmt(ly) + "\" font-size=\"11\">" + escape(label) + "</text>\n";
    ly += 16;
  }
  s += "</svg>\n";
  return s;
}

}  // namespace tariffopt::report
