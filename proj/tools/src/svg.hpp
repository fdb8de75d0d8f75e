#pragma once

#include <string>
#include <vector>

namespace gbpf::cli {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
  std::string color;
  bool markers = false;  // dots instead of a line
};

// Self-contained SVG line chart with axes, ticks and a legend.
std::string line_chart(const std::string& title, const std::string& x_label, const std::vector<Series>& series);

}  // namespace gbpf::cli
