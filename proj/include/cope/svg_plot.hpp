#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace cope::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  // Draw as markers instead of a polyline.
  bool markers = false;
};

struct Figure {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool log_y = false;
  // Shaded x-interval, e.g. the OOD region of a period plot.
  std::optional<std::pair<double, double>> shade_x;
  // Dashed horizontal reference line.
  std::optional<double> h_line;
  int width = 900;
  int height = 540;
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  return colors[i % 6];
}

inline std::string escape(const std::string& s) {
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

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::vector<double> nice_ticks(double lo, double hi, int target = 6) {
  if (!(hi > lo)) return {lo};
  const double raw = (hi - lo) / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0})
    if (m * mag >= raw) {
      step = m * mag;
      break;
    }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step)
    ticks.push_back(std::abs(t) < 1e-9 * step ? 0.0 : t);
  return ticks;
}

// Min/max per bucket keeps oscillations visible after thinning.
inline std::vector<std::pair<double, double>> thin(const Series& s, std::size_t buckets) {
  std::vector<std::pair<double, double>> pts;
  const std::size_t n = s.x.size();
  if (n <= 2 * buckets) {
    for (std::size_t i = 0; i < n; ++i) pts.emplace_back(s.x[i], s.y[i]);
    return pts;
  }
  const std::size_t per = (n + buckets - 1) / buckets;
  for (std::size_t b = 0; b < n; b += per) {
    const std::size_t e = std::min(n, b + per);
    std::size_t imin = b, imax = b;
    for (std::size_t i = b; i < e; ++i) {
      if (s.y[i] < s.y[imin]) imin = i;
      if (s.y[i] > s.y[imax]) imax = i;
    }
    const auto [first, second] = std::minmax(imin, imax);
    pts.emplace_back(s.x[first], s.y[first]);
    if (second != first) pts.emplace_back(s.x[second], s.y[second]);
  }
  return pts;
}

}  // namespace detail

inline std::string render_svg(const Figure& fig) {
  const double left = 80, right = 20, top = 40, bottom = 60;
  const double pw = fig.width - left - right;
  const double ph = fig.height - top - bottom;

  auto ty = [&](double y) { return fig.log_y ? std::log10(std::abs(y)) : y; };
  auto usable = [&](double y) { return std::isfinite(y) && (!fig.log_y || y != 0.0); };

  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : fig.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!usable(s.y[i]) || !std::isfinite(s.x[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, ty(s.y[i]));
      ymax = std::max(ymax, ty(s.y[i]));
    }
  if (fig.h_line) {
    ymin = std::min(ymin, ty(*fig.h_line));
    ymax = std::max(ymax, ty(*fig.h_line));
  }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto py = [&](double y) { return top + (ymax - ty(y)) / (ymax - ymin) * ph; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fig.width << "\" height=\"" << fig.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<text x=\"" << fig.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << detail::escape(fig.title) << "</text>\n";

  if (fig.shade_x) {
    const double a = px(std::max(fig.shade_x->first, xmin));
    const double b = px(std::min(fig.shade_x->second, xmax));
    if (b > a)
      svg << "<rect x=\"" << detail::num(a) << "\" y=\"" << top << "\" width=\"" << detail::num(b - a)
          << "\" height=\"" << ph << "\" fill=\"#d62728\" fill-opacity=\"0.12\"/>\n";
  }

  for (double t : detail::nice_ticks(xmin, xmax)) {
    const double x = px(t);
    svg << "<line x1=\"" << detail::num(x) << "\" y1=\"" << top + ph << "\" x2=\"" << detail::num(x) << "\" y2=\""
        << top + ph + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << detail::num(x) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
        << detail::tick_label(t) << "</text>\n";
  }
  for (double t : detail::nice_ticks(ymin, ymax)) {
    const double y = top + (ymax - t) / (ymax - ymin) * ph;
    svg << "<line x1=\"" << left - 5 << "\" y1=\"" << detail::num(y) << "\" x2=\"" << left << "\" y2=\""
        << detail::num(y) << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << left - 8 << "\" y=\"" << detail::num(y + 4) << "\" text-anchor=\"end\">"
        << (fig.log_y ? "1e" + detail::tick_label(t) : detail::tick_label(t)) << "</text>\n";
  }
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  svg << "<text x=\"" << left + pw / 2 << "\" y=\"" << fig.height - 15 << "\" text-anchor=\"middle\">"
      << detail::escape(fig.x_label) << "</text>\n";
  svg << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
      << detail::escape(fig.y_label) << "</text>\n";

  if (fig.h_line) {
    const double y = py(*fig.h_line);
    svg << "<line x1=\"" << left << "\" y1=\"" << detail::num(y) << "\" x2=\"" << left + pw << "\" y2=\""
        << detail::num(y) << "\" stroke=\"gray\" stroke-dasharray=\"6,4\"/>\n";
  }

  svg << "<g clip-path=\"none\">\n";
  for (std::size_t si = 0; si < fig.series.size(); ++si) {
    const auto& s = fig.series[si];
    if (s.x.size() != s.y.size()) throw std::invalid_argument("plot series '" + s.label + "': x/y length mismatch");
    const auto pts = detail::thin(s, static_cast<std::size_t>(pw));
    if (s.markers) {
      for (const auto& [x, y] : pts)
        if (usable(y))
          svg << "<circle cx=\"" << detail::num(px(x)) << "\" cy=\"" << detail::num(py(y)) << "\" r=\"2.5\" fill=\""
              << detail::palette(si) << "\"/>\n";
    } else {
      svg << "<polyline fill=\"none\" stroke=\"" << detail::palette(si) << "\" stroke-width=\"1.2\" points=\"";
      for (const auto& [x, y] : pts)
        if (usable(y)) svg << detail::num(px(x)) << ',' << detail::num(py(y)) << ' ';
      svg << "\"/>\n";
    }
    const double ly = top + 16 + 16.0 * static_cast<double>(si);
    svg << "<line x1=\"" << left + pw - 150 << "\" y1=\"" << ly << "\" x2=\"" << left + pw - 125 << "\" y2=\"" << ly
        << "\" stroke=\"" << detail::palette(si) << "\" stroke-width=\"2\"/>\n";
    svg << "<text x=\"" << left + pw - 118 << "\" y=\"" << ly + 4 << "\">" << detail::escape(s.label) << "</text>\n";
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

inline void write_svg(const Figure& fig, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << render_svg(fig);
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

}  // namespace cope::plot
