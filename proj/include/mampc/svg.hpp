#pragma once

#include <string>
#include <vector>

namespace mampc {

struct SvgSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::string color = "#1f6fb4";
  bool dashed = false;
  bool staircase = false;  // hold each value until the next sample
};

/// Standalone vector-graphic line plot with axes, tick labels and a legend.
void write_line_plot_svg(const std::string& path, const std::string& title,
                         const std::string& x_label, const std::string& y_label,
                         const std::vector<SvgSeries>& series);

}  // namespace mampc
