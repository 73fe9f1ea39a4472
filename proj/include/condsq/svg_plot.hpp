#pragma once

// Minimal SVG line renderer: axes, optional log-x, legend.

#include <iosfwd>
#include <string>
#include <vector>

namespace condsq::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  int width = 720;
  int height = 480;
};

/// Throws InvalidArgument on empty input, mismatched lengths or non-positive
/// x values on a log axis.
void write_line_plot(std::ostream& os, const std::vector<Series>& series,
                     const PlotOptions& options);

}  // namespace condsq::svg
