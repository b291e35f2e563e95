#include "pathtrack/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "pathtrack/common.hpp"

namespace pathtrack {

PlotKind parse_plot_kind(const std::string& s) {
  if (s == "error_vs_distance") return PlotKind::ErrorVsDistance;
  if (s == "velocity_vs_time") return PlotKind::VelocityVsTime;
  if (s == "trajectory") return PlotKind::Trajectory;
  throw ConfigError("unknown plot kind '" + s + "'");
}

std::string to_string(PlotKind k) {
  switch (k) {
    case PlotKind::ErrorVsDistance: return "error_vs_distance";
    case PlotKind::VelocityVsTime: return "velocity_vs_time";
    case PlotKind::Trajectory: return "trajectory";
  }
  return "?";
}

namespace {

constexpr std::array<const char*, 8> kPalette{"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                              "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v, double step) {
  char buf[32];
  const int digits = step >= 1.0 ? 0 : static_cast<int>(std::ceil(-std::log10(step) - 1e-9));
  std::snprintf(buf, sizeof buf, "%.*f", std::min(digits, 6), std::abs(v) < 1e-12 * step ? 0.0 : v);
  return buf;
}

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

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0;
  return nice * mag;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

Range padded(double lo, double hi) {
  if (!(hi > lo)) {
    const double pad = std::max(std::abs(lo) * 0.1, 0.5);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string render_svg(std::span<const PlotSeries> series, const PlotStyle& style) {
  if (series.empty()) throw DomainError("nothing to plot");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    if (s.x.empty() || s.x.size() != s.y.size()) {
      throw DomainError("series '" + s.label + "' is empty or has mismatched lengths");
    }
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  if (!std::isfinite(xmin)) throw DomainError("series contain no finite points");

  const double left = 70, right = 170, top = 40, bottom = 55;
  const double pw = style.width - left - right;
  const double ph = style.height - top - bottom;
  Range xr = padded(xmin, xmax);
  Range yr = padded(ymin, ymax);
  if (style.equal_aspect) {
    // Grow the narrower range so one unit has the same length on both axes.
    const double sx = (xr.hi - xr.lo) / pw;
    const double sy = (yr.hi - yr.lo) / ph;
    const double s = std::max(sx, sy);
    const double cx = 0.5 * (xr.lo + xr.hi), cy = 0.5 * (yr.lo + yr.hi);
    xr = {cx - 0.5 * s * pw, cx + 0.5 * s * pw};
    yr = {cy - 0.5 * s * ph, cy + 0.5 * s * ph};
  }
  auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  auto py = [&](double y) { return top + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << style.width << "\" height=\""
    << style.height << "\" viewBox=\"0 0 " << style.width << ' ' << style.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (!style.title.empty()) {
    o << "<text x=\"" << num(left + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
      << escape(style.title) << "</text>\n";
  }
  o << "<g stroke=\"#dddddd\" stroke-width=\"1\">\n";
  const double xs = nice_step(xr.hi - xr.lo, 8);
  const double ys = nice_step(yr.hi - yr.lo, 6);
  std::ostringstream labels;
  for (double v = std::ceil(xr.lo / xs) * xs; v <= xr.hi + 1e-9 * xs; v += xs) {
    o << "<line x1=\"" << num(px(v)) << "\" y1=\"" << num(top) << "\" x2=\"" << num(px(v))
      << "\" y2=\"" << num(top + ph) << "\"/>\n";
    labels << "<text x=\"" << num(px(v)) << "\" y=\"" << num(top + ph + 16)
           << "\" text-anchor=\"middle\">" << tick_label(v, xs) << "</text>\n";
  }
  for (double v = std::ceil(yr.lo / ys) * ys; v <= yr.hi + 1e-9 * ys; v += ys) {
    o << "<line x1=\"" << num(left) << "\" y1=\"" << num(py(v)) << "\" x2=\"" << num(left + pw)
      << "\" y2=\"" << num(py(v)) << "\"/>\n";
    labels << "<text x=\"" << num(left - 6) << "\" y=\"" << num(py(v) + 4)
           << "\" text-anchor=\"end\">" << tick_label(v, ys) << "</text>\n";
  }
  o << "</g>\n" << labels.str();
  o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(pw)
    << "\" height=\"" << num(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  o << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(style.height - 12.0)
    << "\" text-anchor=\"middle\">" << escape(style.x_label) << "</text>\n";
  o << "<text transform=\"translate(18," << num(top + ph / 2)
    << ") rotate(-90)\" text-anchor=\"middle\">" << escape(style.y_label) << "</text>\n";

  o << "<defs><clipPath id=\"plot\"><rect x=\"" << num(left) << "\" y=\"" << num(top)
    << "\" width=\"" << num(pw) << "\" height=\"" << num(ph) << "\"/></clipPath></defs>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const PlotSeries& s = series[k];
    const char* color = kPalette[k % kPalette.size()];
    o << "<polyline clip-path=\"url(#plot)\" fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      o << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
    }
    o << "\"/>\n";
    const double ly = top + 14 + 18.0 * static_cast<double>(k);
    const double lx = left + pw + 12;
    o << "<line x1=\"" << num(lx) << "\" y1=\"" << num(ly - 4) << "\" x2=\"" << num(lx + 22)
      << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << num(lx + 28) << "\" y=\"" << num(ly) << "\">" << escape(s.label)
      << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

std::vector<PlotSeries> series_from_runs(std::span<const std::vector<RunSample>> runs,
                                         std::span<const std::string> labels, PlotKind kind,
                                         bool abs_error) {
  if (runs.size() != labels.size()) throw DomainError("one label per run is required");
  std::vector<PlotSeries> out;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    if (runs[k].empty()) throw DomainError("run '" + labels[k] + "' has no samples");
    PlotSeries s;
    s.label = labels[k];
    for (const RunSample& r : runs[k]) {
      switch (kind) {
        case PlotKind::ErrorVsDistance:
          s.x.push_back(r.s);
          s.y.push_back(abs_error ? std::abs(r.e_cg) : r.e_cg);
          break;
        case PlotKind::VelocityVsTime:
          s.x.push_back(r.t);
          s.y.push_back(r.vx);
          break;
        case PlotKind::Trajectory:
          s.x.push_back(r.x);
          s.y.push_back(r.y);
          break;
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string emit_plot(std::span<const std::vector<RunSample>> runs,
                      std::span<const std::string> labels, PlotKind kind, bool abs_error,
                      const std::string& title) {
  PlotStyle style;
  style.title = title;
  switch (kind) {
    case PlotKind::ErrorVsDistance:
      style.x_label = "distance travelled [m]";
      style.y_label = abs_error ? "|cross-track error| [m]" : "cross-track error [m]";
      break;
    case PlotKind::VelocityVsTime:
      style.x_label = "time [s]";
      style.y_label = "speed [m/s]";
      break;
    case PlotKind::Trajectory:
      style.x_label = "x [m]";
      style.y_label = "y [m]";
      style.equal_aspect = true;
      break;
  }
  return render_svg(series_from_runs(runs, labels, kind, abs_error), style);
}

}  // namespace pathtrack
