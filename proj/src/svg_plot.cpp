#include "condsq/svg_plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "condsq/errors.hpp"

namespace condsq::svg {

namespace {

constexpr std::array<const char*, 6> kPalette = {"#1f4e9c", "#d98c00", "#2a8a3e",
                                                 "#b2283a", "#6b3fa0", "#444444"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

// Roughly five round ticks over [lo, hi].
std::vector<double> linear_ticks(double lo, double hi) {
  const double span = hi - lo;
  const double raw = span / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * span; t += step) {
    ticks.push_back(std::abs(t) < 1e-12 * step ? 0.0 : t);
  }
  return ticks;
}

}  // namespace

void write_line_plot(std::ostream& os, const std::vector<Series>& series,
                     const PlotOptions& options) {
  if (series.empty()) throw InvalidArgument("nothing to plot");
  double x_lo = std::numeric_limits<double>::infinity();
  double x_hi = -x_lo;
  double y_lo = x_lo;
  double y_hi = -x_lo;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size() || s.x.empty()) {
      throw InvalidArgument("series '" + s.label + "' has mismatched or empty data");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (options.log_x && !(s.x[i] > 0.0)) {
        throw InvalidArgument("log-x axis needs positive x values");
      }
      const double x = options.log_x ? std::log10(s.x[i]) : s.x[i];
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, s.y[i]);
      y_hi = std::max(y_hi, s.y[i]);
    }
  }
  if (x_hi == x_lo) x_hi = x_lo + 1.0;
  y_lo = std::min(y_lo, 0.0);
  if (y_hi <= y_lo) y_hi = y_lo + 1.0;
  y_hi += 0.05 * (y_hi - y_lo);

  const double left = 70.0, right = 20.0, top = 40.0, bottom = 55.0;
  const double pw = options.width - left - right;
  const double ph = options.height - top - bottom;
  auto px = [&](double x) { return left + (x - x_lo) / (x_hi - x_lo) * pw; };
  auto py = [&](double y) { return top + (1.0 - (y - y_lo) / (y_hi - y_lo)) * ph; };

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << options.width << "\" height=\""
     << options.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!options.title.empty()) {
    os << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
       << escape(options.title) << "</text>\n";
  }
  os << "<rect x=\"" << fmt(left) << "\" y=\"" << fmt(top) << "\" width=\"" << fmt(pw)
     << "\" height=\"" << fmt(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";

  std::vector<double> xticks;
  if (options.log_x) {
    for (double d = std::ceil(x_lo); d <= x_hi + 1e-9; d += 1.0) xticks.push_back(d);
  } else {
    xticks = linear_ticks(x_lo, x_hi);
  }
  for (double t : xticks) {
    const double x = px(t);
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(top + ph) << "\" x2=\"" << fmt(x)
       << "\" y2=\"" << fmt(top + ph + 5) << "\" stroke=\"black\"/>\n";
    const std::string label = options.log_x ? "1e" + tick_label(t) : tick_label(t);
    os << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(top + ph + 18)
       << "\" text-anchor=\"middle\">" << label << "</text>\n";
  }
  for (double t : linear_ticks(y_lo, y_hi)) {
    const double y = py(t);
    os << "<line x1=\"" << fmt(left - 5) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(left)
       << "\" y2=\"" << fmt(y) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt(left - 8) << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">"
       << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << fmt(left + pw / 2) << "\" y=\"" << fmt(options.height - 12.0)
     << "\" text-anchor=\"middle\">" << escape(options.x_label) << "</text>\n";
  os << "<text transform=\"translate(18," << fmt(top + ph / 2)
     << ") rotate(-90)\" text-anchor=\"middle\">" << escape(options.y_label) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kPalette[k % kPalette.size()];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      const double x = options.log_x ? std::log10(s.x[i]) : s.x[i];
      os << (i ? " " : "") << fmt(px(x)) << ',' << fmt(py(s.y[i]));
    }
    os << "\"/>\n";
    const double ly = top + 16.0 + 18.0 * static_cast<double>(k);
    os << "<line x1=\"" << fmt(left + pw - 150) << "\" y1=\"" << fmt(ly) << "\" x2=\""
       << fmt(left + pw - 125) << "\" y2=\"" << fmt(ly) << "\" stroke=\"" << color
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fmt(left + pw - 120) << "\" y=\"" << fmt(ly + 4) << "\">"
       << escape(s.label) << "</text>\n";
  }
  os << "</svg>\n";
}

}  // namespace condsq::svg
