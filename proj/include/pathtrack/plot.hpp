#pragma once

#include <span>
#include <string>
#include <vector>

#include "pathtrack/metrics.hpp"

namespace pathtrack {

enum class PlotKind { ErrorVsDistance, VelocityVsTime, Trajectory };

PlotKind parse_plot_kind(const std::string& s);
std::string to_string(PlotKind k);

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotStyle {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool equal_aspect = false;
  int width = 720;
  int height = 440;
};

/// Self-contained SVG line chart with axes, ticks and a legend. Throws
/// DomainError for no series, an empty series or mismatched lengths.
std::string render_svg(std::span<const PlotSeries> series, const PlotStyle& style);

/// One series per run: e_cg against s, v_x against t, or y against x.
/// `abs_error` plots |e| instead of the signed error.
std::vector<PlotSeries> series_from_runs(std::span<const std::vector<RunSample>> runs,
                                         std::span<const std::string> labels, PlotKind kind,
                                         bool abs_error = false);

std::string emit_plot(std::span<const std::vector<RunSample>> runs,
                      std::span<const std::string> labels, PlotKind kind, bool abs_error = false,
                      const std::string& title = "");

}  // namespace pathtrack
