#include <gtest/gtest.h>

#include "pathtrack/plot.hpp"

using namespace pathtrack;

namespace {

std::vector<PlotSeries> three() {
  std::vector<PlotSeries> s;
  for (int k = 0; k < 3; ++k) {
    PlotSeries p;
    p.label = "k=" + std::to_string(k);
    for (int i = 0; i < 50; ++i) {
      p.x.push_back(i);
      p.y.push_back(std::sin(0.1 * i + k));
    }
    s.push_back(p);
  }
  return s;
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (std::size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST(Svg, OneLegendEntryAndPolylinePerSeries) {
  const std::string svg = render_svg(three(), {"title", "x", "y"});
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(count(svg, "<polyline"), 3u);
  for (int k = 0; k < 3; ++k) EXPECT_EQ(count(svg, ">k=" + std::to_string(k) + "<"), 1u);
}

TEST(Svg, ByteIdenticalForSameInput) {
  EXPECT_EQ(render_svg(three(), {}), render_svg(three(), {}));
}

TEST(Svg, LabelsAreEscaped) {
  auto s = three();
  s[0].label = "a<b&c";
  const std::string svg = render_svg(s, {});
  EXPECT_NE(svg.find("a&lt;b&amp;c"), std::string::npos);
}

TEST(Svg, RejectsEmptyAndMismatched) {
  EXPECT_THROW(render_svg({}, {}), DomainError);
  auto s = three();
  s[1].y.pop_back();
  EXPECT_THROW(render_svg(s, {}), DomainError);
  s = three();
  s[2].x.clear();
  s[2].y.clear();
  EXPECT_THROW(render_svg(s, {}), DomainError);
}

TEST(PlotKind, ParseAndName) {
  for (PlotKind k : {PlotKind::ErrorVsDistance, PlotKind::VelocityVsTime, PlotKind::Trajectory}) {
    EXPECT_EQ(parse_plot_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_plot_kind("pie"), ConfigError);
}

TEST(SeriesFromRuns, ChannelsPerKind) {
  std::vector<RunSample> run(3);
  for (int i = 0; i < 3; ++i) {
    run[i].t = i;
    run[i].s = 2.0 * i;
    run[i].x = 10.0 + i;
    run[i].y = -i;
    run[i].vx = 0.5 * i;
    run[i].e_cg = -0.1 * i;
  }
  const std::vector<std::vector<RunSample>> runs{run};
  const std::vector<std::string> labels{"a"};
  auto e = series_from_runs(runs, labels, PlotKind::ErrorVsDistance, true);
  EXPECT_EQ(e[0].x, (std::vector<double>{0, 2, 4}));
  EXPECT_DOUBLE_EQ(e[0].y[2], 0.2);
  auto v = series_from_runs(runs, labels, PlotKind::VelocityVsTime);
  EXPECT_DOUBLE_EQ(v[0].y[1], 0.5);
  auto t = series_from_runs(runs, labels, PlotKind::Trajectory);
  EXPECT_DOUBLE_EQ(t[0].x[2], 12.0);
  EXPECT_DOUBLE_EQ(t[0].y[2], -2.0);
}
