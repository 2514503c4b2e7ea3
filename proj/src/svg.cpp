#include "dsplit/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace dsplit {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                          "#9467bd", "#ff7f0e", "#8c564b"};

std::string xml_escape(const std::string& s) {
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

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

struct Transform {
  double x_lo, x_hi, y_lo, y_hi;
  double px_lo, px_hi, py_lo, py_hi;  // py_lo is the BOTTOM (larger svg y)
  bool log_x;

  double tx(double x) const {
    const double v = log_x ? std::log10(x) : x;
    const double t = (v - x_lo) / (x_hi - x_lo);
    return px_lo + t * (px_hi - px_lo);
  }
  double ty(double y) const {
    const double t = (y - y_lo) / (y_hi - y_lo);
    const double raw = py_lo + t * (py_hi - py_lo);
    // clamp into the plot box so bands/lines never spill outside
    return std::clamp(raw, std::min(py_lo, py_hi), std::max(py_lo, py_hi));
  }
};

void check_series_shape(const std::vector<double>& x, std::size_t ny,
                        bool log_x, const char* what) {
  if (x.size() < 2)
    throw std::invalid_argument(std::string("svg: ") + what +
                                " needs at least 2 points");
  if (x.size() != ny)
    throw std::invalid_argument(std::string("svg: ") + what +
                                " x/y length mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (log_x && !(x[i] > 0.0))
      throw std::invalid_argument(std::string("svg: ") + what +
                                  " requires positive x on a log axis");
    if (i && !(x[i] > x[i - 1]))
      throw std::invalid_argument(std::string("svg: ") + what +
                                  " x must be strictly increasing");
  }
}

}  // namespace

std::string render_svg(const std::vector<Series>& series,
                       const std::vector<Band>& bands, const ChartSpec& spec) {
  if (series.empty()) throw std::invalid_argument("svg: no series");
  for (const Series& s : series)
    check_series_shape(s.x, s.y.size(), spec.log_x, "series");
  for (const Band& b : bands) {
    check_series_shape(b.x, b.lo.size(), spec.log_x, "band");
    if (b.hi.size() != b.x.size())
      throw std::invalid_argument("svg: band x/hi length mismatch");
  }

  double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo;
  double y_lo = x_lo, y_hi = -x_lo;
  auto eat_x = [&](double x) {
    const double v = spec.log_x ? std::log10(x) : x;
    x_lo = std::min(x_lo, v);
    x_hi = std::max(x_hi, v);
  };
  auto eat_y = [&](double y) {
    if (!std::isfinite(y)) throw std::invalid_argument("svg: nonfinite y");
    y_lo = std::min(y_lo, y);
    y_hi = std::max(y_hi, y);
  };
  for (const Series& s : series) {
    for (double x : s.x) eat_x(x);
    for (double y : s.y) eat_y(y);
  }
  for (const Band& b : bands) {
    for (double x : b.x) eat_x(x);
    for (double y : b.lo) eat_y(y);
    for (double y : b.hi) eat_y(y);
  }
  if (x_hi == x_lo) {
    x_lo -= 0.5;
    x_hi += 0.5;
  }
  if (y_hi == y_lo) {
    y_lo -= 1.0;
    y_hi += 1.0;
  } else {
    const double pad = 0.05 * (y_hi - y_lo);
    y_lo -= pad;
    y_hi += pad;
  }

  const double ml = 70, mr = 20, mt = 40, mb = 55;
  const double w = spec.width, h = spec.height;
  Transform tr{x_lo, x_hi, y_lo, y_hi, ml, w - mr, h - mb, mt, spec.log_x};

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width
      << "\" height=\"" << spec.height << "\" viewBox=\"0 0 " << spec.width
      << " " << spec.height << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\""
      << spec.height << "\" fill=\"white\"/>\n";

  // bands first so lines draw on top
  std::size_t color_i = 0;
  for (const Band& b : bands) {
    const std::string color =
        b.color.empty() ? kPalette[color_i % 6] : b.color;
    out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.25\" "
        << "stroke=\"none\" points=\"";
    for (std::size_t i = 0; i < b.x.size(); ++i)
      out << fmt(tr.tx(b.x[i])) << "," << fmt(tr.ty(b.hi[i])) << " ";
    for (std::size_t i = b.x.size(); i-- > 0;)
      out << fmt(tr.tx(b.x[i])) << "," << fmt(tr.ty(b.lo[i])) << " ";
    out << "\"/>\n";
  }

  // axes
  out << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(h - mb) << "\" x2=\""
      << fmt(w - mr) << "\" y2=\"" << fmt(h - mb)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n"
      << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(mt) << "\" x2=\""
      << fmt(ml) << "\" y2=\"" << fmt(h - mb)
      << "\" stroke=\"black\" stroke-width=\"1\"/>\n";

  // x ticks: decades on a log axis, else 6 evenly spaced
  std::vector<double> xticks;
  if (spec.log_x) {
    for (double d = std::ceil(x_lo); d <= std::floor(x_hi) + 1e-9; d += 1.0)
      xticks.push_back(d);
    if (xticks.empty()) xticks = {x_lo, x_hi};
  } else {
    for (int i = 0; i <= 5; ++i) xticks.push_back(x_lo + (x_hi - x_lo) * i / 5);
  }
  for (double t : xticks) {
    const double px = ml + (t - x_lo) / (x_hi - x_lo) * (w - ml - mr);
    out << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(h - mb) << "\" x2=\""
        << fmt(px) << "\" y2=\"" << fmt(h - mb + 5)
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(h - mb + 20)
        << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
        << (spec.log_x ? "1e" + fmt(t) : fmt(t)) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double yv = y_lo + (y_hi - y_lo) * i / 5;
    const double py = tr.ty(yv);
    out << "<line x1=\"" << fmt(ml - 5) << "\" y1=\"" << fmt(py) << "\" x2=\""
        << fmt(ml) << "\" y2=\"" << fmt(py) << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << fmt(ml - 8) << "\" y=\"" << fmt(py + 4)
        << "\" font-size=\"12\" text-anchor=\"end\" font-family=\"sans-serif\">"
        << fmt(yv) << "</text>\n";
  }

  for (std::size_t si = 0; si < series.size(); ++si) {
    const Series& s = series[si];
    const std::string color =
        s.color.empty() ? kPalette[si % 6] : s.color;
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (i) out << " ";
      out << fmt(tr.tx(s.x[i])) << "," << fmt(tr.ty(s.y[i]));
    }
    out << "\"/>\n";
    // legend entry
    const double ly = mt + 16 * static_cast<double>(si);
    out << "<line x1=\"" << fmt(w - mr - 150) << "\" y1=\"" << fmt(ly)
        << "\" x2=\"" << fmt(w - mr - 125) << "\" y2=\"" << fmt(ly)
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << fmt(w - mr - 120) << "\" y=\"" << fmt(ly + 4)
        << "\" font-size=\"12\" font-family=\"sans-serif\">"
        << xml_escape(s.label) << "</text>\n";
  }

  if (!spec.title.empty())
    out << "<text x=\"" << fmt(w / 2) << "\" y=\"" << fmt(mt - 15)
        << "\" font-size=\"15\" text-anchor=\"middle\" font-family=\"sans-serif\">"
        << xml_escape(spec.title) << "</text>\n";
  if (!spec.x_label.empty())
    out << "<text x=\"" << fmt((ml + w - mr) / 2) << "\" y=\"" << fmt(h - 12)
        << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\">"
        << xml_escape(spec.x_label) << "</text>\n";
  if (!spec.y_label.empty())
    out << "<text x=\"18\" y=\"" << fmt((mt + h - mb) / 2)
        << "\" font-size=\"13\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "transform=\"rotate(-90 18 " << fmt((mt + h - mb) / 2) << ")\">"
        << xml_escape(spec.y_label) << "</text>\n";

  out << "</svg>\n";
  return out.str();
}

}  // namespace dsplit
