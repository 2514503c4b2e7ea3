#pragma once

#include <string>
#include <vector>

namespace dsplit {

struct Series {
  std::string label;
  std::vector<double> x;  // strictly increasing, >= 2 points
  std::vector<double> y;
  std::string color;  // empty -> palette
};

// Shaded confidence band between lo(x) and hi(x).
struct Band {
  std::vector<double> x;
  std::vector<double> lo;
  std::vector<double> hi;
  std::string color;
};

struct ChartSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = true;  // plot against log10(x)
  int width = 800;
  int height = 500;
};

// Self-contained SVG line chart: one polyline per series, optional CI-band
// polygons, axes with ticks, inline legend. No external assets.
std::string render_svg(const std::vector<Series>& series,
                       const std::vector<Band>& bands, const ChartSpec& spec);

}  // namespace dsplit
