#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sfw/core.hpp"
#include "sfw/driver.hpp"

namespace sfw {

inline constexpr std::string_view kCsvHeader =
    "iter,f_value,fw_gap,grad_calls,coord_calls,bits_sent,elapsed_ms";

inline std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_csv(const Trace& t, std::ostream& out) {
  require(!t.records.empty(), "emit_csv: empty trace");
  out << kCsvHeader << '\n';
  for (const auto& r : t.records) {
    out << r.k << ',' << format_real(r.f_value) << ',' << format_real(r.fw_gap) << ','
        << r.grad_calls << ',' << r.coord_calls << ',' << r.bits_sent << ','
        << format_real(r.elapsed_ms) << '\n';
  }
}

inline void emit_csv(const Trace& t, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_csv: cannot open '" + path + "'");
  write_csv(t, out);
  if (!out) throw std::runtime_error("emit_csv: write failed for '" + path + "'");
}

inline Trace read_csv(std::istream& in, std::string label = {}) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw ValidationError("read_csv: missing or unexpected header");
  Trace t;
  t.label = std::move(label);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7)
      throw ValidationError("read_csv: line " + std::to_string(line_no) + " needs 7 fields");
    try {
      IterationRecord r;
      r.k = std::stoull(cells[0]);
      r.f_value = std::stod(cells[1]);
      r.fw_gap = std::stod(cells[2]);
      r.grad_calls = std::stoull(cells[3]);
      r.coord_calls = std::stoull(cells[4]);
      r.bits_sent = std::stoull(cells[5]);
      r.elapsed_ms = std::stod(cells[6]);
      t.records.push_back(r);
    } catch (const std::logic_error&) {
      throw ValidationError("read_csv: malformed number on line " + std::to_string(line_no));
    }
  }
  return t;
}

inline Trace read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open '" + path + "'");
  return read_csv(in, std::filesystem::path(path).stem().string());
}

enum class PlotAxis { iter, grad_calls, bits_sent };
enum class PlotMetric { f_value, fw_gap };

inline PlotAxis parse_plot_axis(std::string_view s) {
  if (s == "iter") return PlotAxis::iter;
  if (s == "grad_calls") return PlotAxis::grad_calls;
  if (s == "bits_sent") return PlotAxis::bits_sent;
  throw ValidationError("plot: unknown x axis '" + std::string(s) + "'");
}

inline PlotMetric parse_plot_metric(std::string_view s) {
  if (s == "f_value") return PlotMetric::f_value;
  if (s == "fw_gap") return PlotMetric::fw_gap;
  throw ValidationError("plot: unknown y metric '" + std::string(s) + "'");
}

namespace detail {

inline double axis_value(const IterationRecord& r, PlotAxis a) {
  switch (a) {
    case PlotAxis::iter: return static_cast<double>(r.k);
    case PlotAxis::grad_calls: return static_cast<double>(r.grad_calls);
    case PlotAxis::bits_sent: return static_cast<double>(r.bits_sent);
  }
  return 0.0;
}

inline double metric_value(const IterationRecord& r, PlotMetric m) {
  return m == PlotMetric::f_value ? r.f_value : r.fw_gap;
}

inline std::string xml_escape(std::string_view s) {
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

inline std::string fmt(double v, const char* spec = "%.4g") {
  char buf[48];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace detail

/// Self-contained SVG: cost on x (linear), metric on y (log10), one polyline
/// and one legend entry per trace. Non-positive metric values are skipped.
inline std::string render_plot(const std::vector<Trace>& traces, PlotAxis x_axis,
                               PlotMetric metric = PlotMetric::f_value) {
  using namespace detail;
  if (traces.empty()) throw ValidationError("plot: no traces given");
  for (const auto& t : traces) {
    if (t.records.size() < 2)
      throw ValidationError("plot: trace '" + t.label + "' has fewer than two points");
    if (x_axis == PlotAxis::bits_sent &&
        std::all_of(t.records.begin(), t.records.end(),
                    [](const IterationRecord& r) { return r.bits_sent == 0; }))
      throw ValidationError("plot: metric absent for method (trace '" + t.label +
                            "' sends no bits)");
  }

  double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
  double y_min = x_min, y_max = -x_min;
  for (const auto& t : traces) {
    for (const auto& r : t.records) {
      const double xv = axis_value(r, x_axis);
      x_min = std::min(x_min, xv);
      x_max = std::max(x_max, xv);
      const double yv = metric_value(r, metric);
      if (yv > 0.0 && std::isfinite(yv)) {
        y_min = std::min(y_min, std::log10(yv));
        y_max = std::max(y_max, std::log10(yv));
      }
    }
  }
  if (!std::isfinite(y_min)) throw ValidationError("plot: no positive values to draw on a log axis");
  if (x_max <= x_min) x_max = x_min + 1.0;
  if (y_max - y_min < 1e-12) {
    y_min -= 0.5;
    y_max += 0.5;
  }

  const double W = 820, H = 520, left = 90, right = 200, top = 30, bottom = 60;
  const double pw = W - left - right, ph = H - top - bottom;
  auto px = [&](double v) { return left + (v - x_min) / (x_max - x_min) * pw; };
  auto py = [&](double lv) { return top + (y_max - lv) / (y_max - y_min) * ph; };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                  "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
  const char* x_name = x_axis == PlotAxis::iter         ? "iteration"
                       : x_axis == PlotAxis::grad_calls ? "gradient computations"
                                                        : "bits sent";
  const char* y_name = metric == PlotMetric::f_value ? "f(x)" : "FW gap";

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
    << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  for (int t = 0; t <= 5; ++t) {
    const double xv = x_min + (x_max - x_min) * t / 5.0;
    s << "<text x=\"" << fmt(px(xv), "%.2f") << "\" y=\"" << top + ph + 18
      << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
  }
  const int lo = static_cast<int>(std::floor(y_min)), hi = static_cast<int>(std::ceil(y_max));
  const int step = std::max(1, (hi - lo) / 8);
  for (int e = lo; e <= hi; e += step) {
    if (e < y_min - 1e-9 || e > y_max + 1e-9) continue;
    const double y = py(e);
    s << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << fmt(y, "%.2f")
      << "\" y2=\"" << fmt(y, "%.2f") << "\" stroke=\"#dddddd\"/>\n";
    s << "<text x=\"" << left - 6 << "\" y=\"" << fmt(y + 4, "%.2f")
      << "\" text-anchor=\"end\">1e" << e << "</text>\n";
  }
  s << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
    << x_name << "</text>\n";
  s << "<text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
    << top + ph / 2 << ")\">" << y_name << " (log scale)</text>\n";

  for (std::size_t i = 0; i < traces.size(); ++i) {
    const char* color = palette[i % std::size(palette)];
    s << "<polyline class=\"trace\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (const auto& r : traces[i].records) {
      const double yv = metric_value(r, metric);
      if (!(yv > 0.0) || !std::isfinite(yv)) continue;
      if (!first) s << ' ';
      s << fmt(px(axis_value(r, x_axis)), "%.2f") << ',' << fmt(py(std::log10(yv)), "%.2f");
      first = false;
    }
    s << "\"/>\n";
    const double ly = top + 10 + 20.0 * static_cast<double>(i);
    s << "<g class=\"legend\"><line x1=\"" << left + pw + 15 << "\" x2=\"" << left + pw + 40
      << "\" y1=\"" << ly << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/><text x=\"" << left + pw + 46 << "\" y=\"" << ly + 4 << "\">"
      << xml_escape(traces[i].label) << "</text></g>\n";
  }
  s << "</svg>\n";
  return s.str();
}

inline void emit_plot(const std::vector<Trace>& traces, PlotAxis x_axis, const std::string& path,
                      PlotMetric metric = PlotMetric::f_value) {
  const std::string svg = render_plot(traces, x_axis, metric);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_plot: cannot open '" + path + "'");
  out << svg;
}

}  // namespace sfw
