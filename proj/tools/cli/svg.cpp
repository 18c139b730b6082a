#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace cltcert::cli {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 80;
constexpr double kRight = 170;
constexpr double kTop = 40;
constexpr double kBottom = 60;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

struct Axis {
  double lo = 0;
  double hi = 1;
  bool log = false;

  double map(double v, double pixel_lo, double pixel_hi) const {
    const double t = log ? (std::log10(v) - lo) / (hi - lo) : (v - lo) / (hi - lo);
    return pixel_lo + t * (pixel_hi - pixel_lo);
  }
  double value_at(double t) const {
    const double v = lo + t * (hi - lo);
    return log ? std::pow(10.0, v) : v;
  }
};

Axis make_axis(std::vector<double> values, bool log) {
  if (log) {
    std::erase_if(values, [](double v) { return !(v > 0.0); });
    if (values.empty()) throw std::runtime_error("log axis has no positive values");
    for (double& v : values) v = std::log10(v);
  }
  if (values.empty()) throw std::runtime_error("nothing to plot");
  auto [mn, mx] = std::minmax_element(values.begin(), values.end());
  double lo = *mn;
  double hi = *mx;
  if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
    lo -= 0.5;
    hi += 0.5;
  } else if (!log) {
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
  }
  return {lo, hi, log};
}

}  // namespace

std::string render_svg(const Chart& chart) {
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& s : chart.series) {
    for (const auto& [x, y] : s.points) {
      if (std::isfinite(x) && std::isfinite(y)) {
        xs.push_back(x);
        ys.push_back(y);
      }
    }
  }
  for (const auto& [label, y] : chart.levels) {
    if (std::isfinite(y)) ys.push_back(y);
  }
  const Axis ax = make_axis(xs, chart.log_x);
  const Axis ay = make_axis(ys, chart.log_y);

  const double x0 = kLeft;
  const double x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom;
  const double y1 = kTop;

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << escape(chart.title) << "</text>\n";
  svg << "<rect x=\"" << x0 << "\" y=\"" << y1 << "\" width=\"" << x1 - x0 << "\" height=\""
      << y0 - y1 << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double t = i / 4.0;
    const double px = x0 + t * (x1 - x0);
    const double py = y0 + t * (y1 - y0);
    svg << "<text x=\"" << px << "\" y=\"" << y0 + 18 << "\" text-anchor=\"middle\">"
        << num(ax.value_at(t)) << "</text>\n";
    svg << "<text x=\"" << x0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">"
        << num(ay.value_at(t)) << "</text>\n";
    svg << "<line x1=\"" << x0 << "\" y1=\"" << py << "\" x2=\"" << x1 << "\" y2=\"" << py
        << "\" stroke=\"#ddd\"/>\n";
  }
  svg << "<text x=\"" << (x0 + x1) / 2 << "\" y=\"" << kHeight - 18
      << "\" text-anchor=\"middle\">" << escape(chart.x_label)
      << (chart.log_x ? " (log)" : "") << "</text>\n";
  svg << "<text transform=\"translate(18," << (y0 + y1) / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << escape(chart.y_label)
      << (chart.log_y ? " (log)" : "") << "</text>\n";

  double legend_y = y1 + 10;
  auto legend = [&](const std::string& name, const std::string& color, bool dashed) {
    svg << "<line x1=\"" << x1 + 12 << "\" y1=\"" << legend_y << "\" x2=\"" << x1 + 36
        << "\" y2=\"" << legend_y << "\" stroke=\"" << color << "\" stroke-width=\"2\""
        << (dashed ? " stroke-dasharray=\"5,4\"" : "") << "/>\n";
    svg << "<text x=\"" << x1 + 42 << "\" y=\"" << legend_y + 4 << "\">" << escape(name)
        << "</text>\n";
    legend_y += 18;
  };

  std::size_t color = 0;
  for (const auto& [label, y] : chart.levels) {
    if (!std::isfinite(y)) continue;
    const char* c = kPalette[color++ % std::size(kPalette)];
    const double py = ay.map(y, y0, y1);
    svg << "<line x1=\"" << x0 << "\" y1=\"" << py << "\" x2=\"" << x1 << "\" y2=\"" << py
        << "\" stroke=\"" << c << "\" stroke-dasharray=\"5,4\"/>\n";
    legend(label, c, true);
  }
  for (const auto& s : chart.series) {
    const char* c = kPalette[color++ % std::size(kPalette)];
    std::ostringstream path;
    bool first = true;
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      if ((chart.log_x && !(x > 0)) || (chart.log_y && !(y > 0))) continue;
      const double px = ax.map(x, x0, x1);
      const double py = ay.map(y, y0, y1);
      path << (first ? "M" : " L") << px << "," << py;
      svg << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"2.5\" fill=\"" << c
          << "\"/>\n";
      first = false;
    }
    if (!first) {
      svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << c
          << "\" stroke-width=\"1.5\"/>\n";
    }
    legend(s.name, c, false);
  }
  svg << "</svg>\n";
  return svg.str();
}

}  // namespace cltcert::cli
