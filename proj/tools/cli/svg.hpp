#pragma once

// Minimal SVG line charts for report tables.

#include <string>
#include <utility>
#include <vector>

namespace cltcert::cli {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  std::vector<Series> series;
  // Horizontal reference lines (label, y).
  std::vector<std::pair<std::string, double>> levels;
};

std::string render_svg(const Chart& chart);

}  // namespace cltcert::cli
