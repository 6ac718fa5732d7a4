#include "ahead/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace ahead {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

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

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4g", v);
  return buf;
}

struct Range {
  double lo = 0;
  double hi = 1;
};

Range padded(double lo, double hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) return {0, 1};
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

void header(std::ostringstream& o, const std::string& title) {
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
    << escape(title) << "</text>\n";
}

void y_axis(std::ostringstream& o, const Range& y, const std::string& label) {
  const double plot_h = kHeight - kTop - kBottom;
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
    << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = y.lo + (y.hi - y.lo) * i / 4.0;
    const double py = kHeight - kBottom - plot_h * i / 4.0;
    o << "<line x1=\"" << kLeft - 4 << "\" y1=\"" << py << "\" x2=\"" << kWidth - kRight
      << "\" y2=\"" << py << "\" stroke=\"#ddd\"/>\n"
      << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
      << "\" text-anchor=\"end\" font-size=\"11\">" << num(v) << "</text>\n";
  }
  o << "<text x=\"16\" y=\"" << kTop + plot_h / 2 << "\" font-size=\"12\" text-anchor=\"middle\""
    << " transform=\"rotate(-90 16 " << kTop + plot_h / 2 << ")\">" << escape(label) << "</text>\n";
}

bool write_text(const std::string& text, const std::filesystem::path& path, std::string* error) {
  try {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
    return true;
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return false;
  }
}

}  // namespace

std::string render_svg(const BarChart& chart) {
  std::ostringstream o;
  header(o, chart.title);
  const std::size_t n = std::min(chart.categories.size(), chart.values.size());
  double lo = 0;
  double hi = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isfinite(chart.values[i])) {
      lo = std::min(lo, chart.values[i]);
      hi = std::max(hi, chart.values[i]);
    }
  }
  const Range y = padded(lo, hi);
  y_axis(o, y, chart.y_label);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto to_y = [&](double v) { return kHeight - kBottom - plot_h * (v - y.lo) / (y.hi - y.lo); };
  const double slot = n > 0 ? plot_w / static_cast<double>(n) : plot_w;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::isfinite(chart.values[i]) ? chart.values[i] : 0.0;
    const double x = kLeft + slot * static_cast<double>(i) + slot * 0.15;
    const double top = to_y(std::max(v, 0.0));
    const double bottom = to_y(std::min(v, 0.0));
    o << "<rect x=\"" << x << "\" y=\"" << top << "\" width=\"" << slot * 0.7 << "\" height=\""
      << std::max(bottom - top, 0.5) << "\" fill=\"" << kPalette[i % 6] << "\"/>\n"
      << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << top - 4
      << "\" text-anchor=\"middle\" font-size=\"11\">" << num(chart.values[i]) << "</text>\n"
      << "<text x=\"" << x + slot * 0.35 << "\" y=\"" << kHeight - kBottom + 18
      << "\" text-anchor=\"middle\" font-size=\"11\">" << escape(chart.categories[i]) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::string render_svg(const LineChart& chart) {
  std::ostringstream o;
  header(o, chart.title);
  const auto tx = [&](double x) { return chart.log_x ? std::log10(x) : x; };
  constexpr double inf = std::numeric_limits<double>::infinity();
  double xlo = inf;
  double xhi = -inf;
  double ylo = inf;
  double yhi = -inf;
  for (const auto& s : chart.series) {
    for (const auto& [x, yv] : s.points) {
      if ((chart.log_x && x <= 0) || !std::isfinite(x) || !std::isfinite(yv)) continue;
      xlo = std::min(xlo, tx(x));
      xhi = std::max(xhi, tx(x));
      ylo = std::min(ylo, yv);
      yhi = std::max(yhi, yv);
    }
  }
  const Range xr = padded(xlo, xhi);
  const Range yr = padded(ylo, yhi);
  y_axis(o, yr, chart.y_label);
  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const auto px = [&](double x) { return kLeft + plot_w * (tx(x) - xr.lo) / (xr.hi - xr.lo); };
  const auto py = [&](double v) { return kHeight - kBottom - plot_h * (v - yr.lo) / (yr.hi - yr.lo); };
  o << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight
    << "\" y2=\"" << kHeight - kBottom << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double v = xr.lo + (xr.hi - xr.lo) * i / 4.0;
    const double x = kLeft + plot_w * i / 4.0;
    o << "<text x=\"" << x << "\" y=\"" << kHeight - kBottom + 16
      << "\" text-anchor=\"middle\" font-size=\"11\">" << num(chart.log_x ? std::pow(10.0, v) : v)
      << "</text>\n";
  }
  o << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 14
    << "\" text-anchor=\"middle\" font-size=\"12\">" << escape(chart.x_label) << "</text>\n";
  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    std::string pts;
    for (const auto& [x, yv] : s.points) {
      if ((chart.log_x && x <= 0) || !std::isfinite(x) || !std::isfinite(yv)) continue;
      pts += num(px(x)) + "," + num(py(yv)) + " ";
    }
    const char* color = kPalette[k % 6];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << pts
      << "\"/>\n";
    o << "<text x=\"" << kWidth - kRight - 4 << "\" y=\"" << kTop + 14 * (k + 1)
      << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << escape(s.name)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

bool write_svg(const BarChart& chart, const std::filesystem::path& path, std::string* error) {
  try {
    return write_text(render_svg(chart), path, error);
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return false;
  }
}

bool write_svg(const LineChart& chart, const std::filesystem::path& path, std::string* error) {
  try {
    return write_text(render_svg(chart), path, error);
  } catch (const std::exception& e) {
    if (error) *error = e.what();
    return false;
  }
}

}  // namespace ahead
