#pragma once

// Static SVG charts: quantile fans over a scatter of observations, and
// error-vs-level curves from a replication summary.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nqnet/report.hpp"

namespace nqnet {

class PlotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct ChartSpec {
  std::string title, x_label, y_label;
  std::vector<Series> lines;
  Series scatter;  // drawn as dots, may be empty
  double width = 720, height = 480;
};

namespace detail {

inline const char* palette(std::size_t i) {
  static const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  return colors[i % 10];
}

inline std::string escape(const std::string& s) {
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

inline double parse_cell(const std::string& s) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw PlotError("non-numeric cell '" + s + "'");
  }
}

}  // namespace detail

inline std::string render_svg(const ChartSpec& chart) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  auto extend = [&](const Series& s) {
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]);
      y1 = std::max(y1, s.y[i]);
    }
  };
  for (const auto& s : chart.lines) extend(s);
  extend(chart.scatter);
  if (!(x0 <= x1)) throw PlotError("nothing to plot");
  if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
  if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
  const double pad = 0.05 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  const double left = 70, right = 150, top = 40, bottom = 55;
  const double pw = chart.width - left - right, ph = chart.height - top - bottom;
  auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

  std::ostringstream o;
  o << std::fixed << std::setprecision(2);
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << chart.width << "\" height=\"" << chart.height
    << "\" viewBox=\"0 0 " << chart.width << ' ' << chart.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << chart.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
    << detail::escape(chart.title) << "</text>\n";
  o << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"#333\"/>\n";

  for (int t = 0; t <= 5; ++t) {
    const double xv = x0 + (x1 - x0) * t / 5.0, yv = y0 + (y1 - y0) * t / 5.0;
    std::ostringstream xl, yl;
    xl << std::setprecision(3) << xv;
    yl << std::setprecision(3) << yv;
    o << "<line x1=\"" << px(xv) << "\" y1=\"" << top + ph << "\" x2=\"" << px(xv) << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"#333\"/><text x=\"" << px(xv) << "\" y=\"" << top + ph + 18
      << "\" text-anchor=\"middle\">" << xl.str() << "</text>\n";
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << py(yv) << "\" x2=\"" << left << "\" y2=\"" << py(yv)
      << "\" stroke=\"#333\"/><text x=\"" << left - 8 << "\" y=\"" << py(yv) + 4
      << "\" text-anchor=\"end\">" << yl.str() << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << chart.height - 12 << "\" text-anchor=\"middle\">"
    << detail::escape(chart.x_label) << "</text>\n";
  o << "<text transform=\"translate(16," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
    << detail::escape(chart.y_label) << "</text>\n";

  if (!chart.scatter.x.empty()) {
    o << "<g class=\"scatter\" fill=\"#555\" fill-opacity=\"0.45\">\n";
    for (std::size_t i = 0; i < chart.scatter.x.size(); ++i) {
      const double yv = chart.scatter.y[i];
      if (yv < y0 || yv > y1) continue;
      o << "<circle cx=\"" << px(chart.scatter.x[i]) << "\" cy=\"" << py(yv) << "\" r=\"1.8\"/>\n";
    }
    o << "</g>\n";
  }

  for (std::size_t l = 0; l < chart.lines.size(); ++l) {
    const auto& s = chart.lines[l];
    o << "<polyline class=\"series\" fill=\"none\" stroke=\"" << detail::palette(l)
      << "\" stroke-width=\"1.6\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) o << (i ? " " : "") << px(s.x[i]) << ',' << py(s.y[i]);
    o << "\"/>\n";
    const double ly = top + 12 + 16.0 * static_cast<double>(l);
    o << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
      << "\" stroke=\"" << detail::palette(l) << "\" stroke-width=\"2\"/><text x=\"" << left + pw + 36
      << "\" y=\"" << ly + 4 << "\">" << detail::escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

/// Fan chart from a curves table (x,q_...) and an optional dataset table
/// (x_1,y) used as the scatter.
inline ChartSpec fan_chart(const CsvTable& curves, const CsvTable* data, const std::string& title) {
  if (curves.rows.empty()) throw PlotError("curves csv has no rows");
  if (curves.header.empty() || curves.header[0] != "x") throw PlotError("curves csv: first column must be 'x'");
  ChartSpec chart;
  chart.title = title;
  chart.x_label = "x";
  chart.y_label = "y";
  for (std::size_t c = 1; c < curves.header.size(); ++c) {
    if (curves.header[c].rfind("q_", 0) != 0) throw PlotError("curves csv: unexpected column '" + curves.header[c] + "'");
    Series s;
    s.label = "tau=" + curves.header[c].substr(2);
    for (const auto& row : curves.rows) {
      s.x.push_back(detail::parse_cell(row[0]));
      s.y.push_back(detail::parse_cell(row[c]));
    }
    chart.lines.push_back(std::move(s));
  }
  if (chart.lines.empty()) throw PlotError("curves csv has no quantile columns");
  if (data) {
    if (data->header.size() != 2 || data->header[0] != "x_1" || data->header[1] != "y")
      throw PlotError("scatter data must be a univariate dataset (x_1,y)");
    for (const auto& row : data->rows) {
      chart.scatter.x.push_back(detail::parse_cell(row[0]));
      chart.scatter.y.push_back(detail::parse_cell(row[1]));
    }
  }
  return chart;
}

/// One line per (model, method) of a summary table; metric is a column
/// name such as l1_mean or l2sq_mean.
inline ChartSpec error_chart(const CsvTable& summary, const std::string& metric) {
  if (summary.rows.empty()) throw PlotError("summary csv has no rows");
  std::size_t cm, cmeth, ctau, cval;
  try {
    cm = summary.column("model");
    cmeth = summary.column("method");
    ctau = summary.column("tau");
    cval = summary.column(metric);
  } catch (const std::exception& e) {
    throw PlotError(e.what());
  }
  std::vector<std::string> order;
  std::map<std::string, Series> by_key;
  for (const auto& row : summary.rows) {
    const std::string key = row[cm] + " " + row[cmeth];
    if (!by_key.count(key)) {
      order.push_back(key);
      by_key[key].label = key;
    }
    by_key[key].x.push_back(detail::parse_cell(row[ctau]));
    by_key[key].y.push_back(detail::parse_cell(row[cval]));
  }
  ChartSpec chart;
  chart.title = metric + " by quantile level";
  chart.x_label = "tau";
  chart.y_label = metric;
  for (const auto& k : order) chart.lines.push_back(std::move(by_key[k]));
  return chart;
}

}  // namespace nqnet
