#pragma once
// Minimal self-contained SVG line plot (inline styles, no external assets).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

namespace qjunction::cli {

struct Series {
  std::string label;
  std::vector<double> y;
};

inline std::string fmt_num(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

inline std::string svg_line_plot(const std::vector<double>& x, const std::vector<Series>& series,
                                 const std::string& x_label, const std::string& y_label, double y_min = 0.0,
                                 double y_max = 1.0) {
  constexpr double W = 800, H = 500, L = 70, R = 150, T = 30, B = 60;
  static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  double x_min = x.empty() ? 0.0 : *std::min_element(x.begin(), x.end());
  double x_max = x.empty() ? 1.0 : *std::max_element(x.begin(), x.end());
  if (x_max == x_min) x_max = x_min + 1.0;
  auto px = [&](double v) { return L + (v - x_min) / (x_max - x_min) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y_min) / (y_max - y_min) * (H - T - B); };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
    << " " << H << "\">\n";
  s << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" style=\"fill:#ffffff\"/>\n";
  s << "<g style=\"stroke:#000000;stroke-width:1\">\n";
  s << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\"/>\n";
  s << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\"/>\n";
  s << "</g>\n";
  s << "<g style=\"font-family:sans-serif;font-size:12px;fill:#000000\">\n";
  for (int k = 0; k <= 5; ++k) {
    const double xv = x_min + (x_max - x_min) * k / 5.0;
    const double yv = y_min + (y_max - y_min) * k / 5.0;
    s << "<text x=\"" << fmt_num(px(xv)) << "\" y=\"" << H - B + 18 << "\" style=\"text-anchor:middle\">"
      << fmt_num(xv, 4) << "</text>\n";
    s << "<text x=\"" << L - 8 << "\" y=\"" << fmt_num(py(yv) + 4) << "\" style=\"text-anchor:end\">"
      << fmt_num(yv, 3) << "</text>\n";
  }
  s << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 15 << "\" style=\"text-anchor:middle;font-size:14px\">"
    << x_label << "</text>\n";
  s << "<text x=\"20\" y=\"" << (T + H - B) / 2 << "\" style=\"text-anchor:middle;font-size:14px\" transform=\"rotate(-90 20 "
    << (T + H - B) / 2 << ")\">" << y_label << "</text>\n";
  s << "</g>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = palette[k % 10];
    s << "<polyline style=\"fill:none;stroke:" << color << ";stroke-width:1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < x.size() && i < series[k].y.size(); ++i) {
      if (!std::isfinite(series[k].y[i])) continue;
      s << (first ? "" : " ") << fmt_num(px(x[i])) << "," << fmt_num(py(std::clamp(series[k].y[i], y_min, y_max)));
      first = false;
    }
    s << "\"/>\n";
    const double ly = T + 10 + 18.0 * static_cast<double>(k);
    s << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
      << "\" style=\"stroke:" << color << ";stroke-width:2\"/>\n";
    s << "<text x=\"" << W - R + 35 << "\" y=\"" << ly + 4
      << "\" style=\"font-family:sans-serif;font-size:12px;fill:#000000\">" << series[k].label << "</text>\n";
  }
  s << "</svg>\n";
  return s.str();
}

}  // namespace qjunction::cli
