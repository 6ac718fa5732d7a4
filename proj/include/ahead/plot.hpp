#pragma once

// Minimal standalone SVG charts. Writers never throw; they return false and
// leave a message in `error` when the file could not be produced.

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace ahead {

struct BarChart {
  std::string title;
  std::string y_label;
  std::vector<std::string> categories;
  std::vector<double> values;
};

struct LineSeries {
  std::string name;
  std::vector<std::pair<double, double>> points;
};

struct LineChart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<LineSeries> series;
  /// Plot x on a log10 axis; non-positive x values are dropped.
  bool log_x = false;
};

std::string render_svg(const BarChart& chart);
std::string render_svg(const LineChart& chart);

bool write_svg(const BarChart& chart, const std::filesystem::path& path, std::string* error = nullptr);
bool write_svg(const LineChart& chart, const std::filesystem::path& path, std::string* error = nullptr);

}  // namespace ahead
