#pragma once

#include <string>
#include <vector>

namespace tariffopt::report {

// Minimal deterministic SVG canvas with a single data frame.
class SvgPlot {
 public:
  SvgPlot(double width, double height, std::string title);

  void set_x_range(double lo, double hi);
  void set_y_range(double lo, double hi);
  void set_labels(std::string x, std::string y);

  void polyline(const std::vector<double>& x, const std::vector<double>& y, const std::string& color,
                double stroke_width = 1.5, bool dashed = false);
  // Horizontal-then-vertical step function through the points.
  void step(const std::vector<double>& x, const std::vector<double>& y, const std::string& color);
  void marker(double x, double y, const std::string& color, double radius = 3.0);
  void rect(double x0, double y0, double x1, double y1, const std::string& fill, const std::string& stroke = "none");
  void segment(double x0, double y0, double x1, double y1, const std::string& color, double stroke_width = 1.0);
  void text(double x, double y, const std::string& body, const std::string& anchor = "middle", double size = 11.0);
  void legend(const std::vector<std::pair<std::string, std::string>>& entries);
  // Category labels placed under the x axis instead of numeric ticks.
  void x_categories(const std::vector<std::pair<double, std::string>>& ticks);

  std::string render() const;

 private:
  double px(double x) const;
  double py(double y) const;

  double width_, height_;
  double left_ = 64, right_ = 24, top_ = 36, bottom_ = 48;
  double x0_ = 0, x1_ = 1, y0_ = 0, y1_ = 1;
  std::string title_, xlabel_, ylabel_;
  std::vector<std::pair<double, std::string>> x_categories_;
  std::vector<std::string> body_;
  std::vector<std::pair<std::string, std::string>> legend_;
};

std::string fmt(double v);  // "%.6g"
std::string heat_color(double t);  // t in [0,1], white to dark blue

}  // namespace tariffopt::report
