#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "pathtrack/course.hpp"

using namespace pathtrack;

namespace {

SimState at(double x, double y, double theta, Anchor anchor = Anchor::CenterOfGravity) {
  SimState s;
  s.x = x;
  s.y = y;
  s.theta = theta;
  s.vx = 5.0;
  s.anchor = anchor;
  return s;
}

std::vector<Course> benchmark_courses() {
  return {gen_straight(200, 0.25), gen_circle(30, 0.25), gen_lane_change(50, 30, 3.5, 50, 0.25),
          gen_sine(3, 50, 200, 0.25)};
}

}  // namespace

TEST(Straight, PointCountAndShape) {
  const Course c = gen_straight(100, 0.5);
  EXPECT_EQ(c.size(), 201u);
  EXPECT_NEAR(c.points().back().s, 100.0, 0.25);
  for (const auto& p : c.points()) {
    EXPECT_EQ(p.kappa, 0.0);
    EXPECT_EQ(p.theta, 0.0);
  }
}

TEST(Straight, RejectsBadDimensions) {
  EXPECT_THROW(gen_straight(0.1, 0.5), DomainError);
  EXPECT_THROW(gen_straight(10, 0.0), DomainError);
}

TEST(Circle, CurvatureLengthAndTangency) {
  const Course c = gen_circle(20, 0.25);
  EXPECT_TRUE(c.closed());
  EXPECT_NEAR(c.length(), 2 * kPi * 20, 0.25);
  for (const auto& p : c.points()) {
    EXPECT_DOUBLE_EQ(p.kappa, 0.05);
    EXPECT_NEAR(std::abs(wrap_angle(p.theta - std::atan2(p.y, p.x))), kPi / 2, 1e-12);
  }
  EXPECT_NEAR(c[0].x, 20.0, 1e-12);
  EXPECT_NEAR(c[0].theta, kPi / 2, 1e-12);
}

TEST(LaneChange, BoundaryConditions) {
  const Course c = gen_lane_change(50, 30, 3.5, 50, 0.25);
  EXPECT_EQ(c.points().front().y, 0.0);
  EXPECT_NEAR(c.points().back().y, 3.5, 1e-12);
  EXPECT_EQ(c.points().front().kappa, 0.0);
  EXPECT_EQ(c.points().back().kappa, 0.0);
}

TEST(LaneChange, CurvatureAntisymmetricAboutMidpoint) {
  const Course c = gen_lane_change(50, 30, 3.5, 50, 0.25);
  // x is uniformly sampled; index i and n-1-i mirror about x = 65.
  const auto& pts = c.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& a = pts[i];
    const auto& b = pts[pts.size() - 1 - i];
    if (std::abs(a.x + b.x - 130.0) > 1e-9) continue;
    EXPECT_NEAR(a.kappa, -b.kappa, 1e-12);
  }
}

TEST(LaneChange, MaxCurvatureMatchesDenseScan) {
  const double offset = 3.5, t = 30.0;
  // Oracle: dense scan of the analytic quintic's curvature.
  double best = 0.0;
  for (int i = 0; i <= 300000; ++i) {
    const double u = i / 300000.0;
    const double d1 = offset / t * 30 * u * u * (1 - u) * (1 - u);
    const double d2 = offset / (t * t) * 60 * u * (1 - u) * (1 - 2 * u);
    best = std::max(best, std::abs(d2) / std::pow(1 + d1 * d1, 1.5));
  }
  const Course c = gen_lane_change(50, t, offset, 50, 0.01);
  double got = 0.0;
  for (const auto& p : c.points()) got = std::max(got, std::abs(p.kappa));
  EXPECT_NEAR(got, best, 1e-4 * best);
}

TEST(Sine, InflectionsAndCrest) {
  const double a = 3, lambda = 50;
  const Course c = gen_sine(a, lambda, 200, 0.25);
  for (const auto& p : c.points()) {
    const double phase = std::fmod(p.x, lambda / 2);
    if (phase < 1e-9 || lambda / 2 - phase < 1e-9) EXPECT_NEAR(p.kappa, 0.0, 1e-12);
    if (std::abs(p.x - lambda / 4) < 1e-9) {
      const double w = 2 * kPi / lambda;
      EXPECT_NEAR(p.kappa, -a * w * w, 1e-12);
    }
  }
  // Sign alternates between half-waves.
  EXPECT_LT(c.at_arc(20).kappa, 0.0);
}

TEST(Sine, ZeroAmplitudeIsStraight) {
  const Course s = gen_sine(0, 50, 100, 0.5);
  const Course t = gen_straight(100, 0.5);
  ASSERT_EQ(s.size(), t.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i].y, 0.0);
    EXPECT_EQ(s[i].kappa, 0.0);
    EXPECT_NEAR(s[i].s, t[i].s, 1e-12);
  }
}

TEST(CourseProperty, CurvatureMatchesHeadingDifferences) {
  for (const Course& c : benchmark_courses()) {
    const auto& pts = c.points();
    for (std::size_t i = 4; i + 4 < pts.size(); ++i) {
      const double fd = wrap_angle(pts[i + 1].theta - pts[i - 1].theta) / (pts[i + 1].s - pts[i - 1].s);
      EXPECT_LE(std::abs(fd - pts[i].kappa), 0.01 * std::abs(pts[i].kappa) + 1e-3) << "point " << i;
    }
  }
}

TEST(CourseInvariant, RejectsBadPointSets) {
  std::vector<PathPoint> one{{0, 0, 0, 0, 0}};
  EXPECT_THROW(Course(one, false), DomainError);
  std::vector<PathPoint> back{{0, 0, 0, 0, 0}, {1, 0, 0, 0, 1}, {0.5, 0, 0, 0, 0.5}};
  EXPECT_THROW(Course(back, false, 1.0), DomainError);
  std::vector<PathPoint> skew{{0, 0, 1.0, 0, 0}, {1, 0, 1.0, 0, 1}};
  EXPECT_THROW(Course(skew, false), DomainError);
}

TEST(Nearest, OnPointAndProjection) {
  const Course s = gen_straight(100, 0.5);
  const NearestResult a = nearest_point(s, {s[10].x, s[10].y});
  EXPECT_NEAR(a.distance, 0.0, 1e-12);
  EXPECT_NEAR(a.point.x, s[10].x, 1e-12);
  const NearestResult b = nearest_point(s, {5, 1});
  EXPECT_NEAR(b.point.x, 5.0, 1e-12);
  EXPECT_NEAR(b.point.y, 0.0, 1e-12);
  EXPECT_NEAR(b.distance, 1.0, 1e-12);
}

TEST(Nearest, CircleRadialProjection) {
  const Course c = gen_circle(20, 0.25);
  const NearestResult r = nearest_point(c, {30, 0});
  EXPECT_NEAR(r.point.x, 20.0, 1e-9);
  EXPECT_NEAR(r.point.y, 0.0, 1e-9);
}

TEST(NearestProperty, HintedSearchMatchesGlobalNearPath) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> off(-5.0, 5.0);
  for (const Course& c : benchmark_courses()) {
    std::optional<std::size_t> hint = 0;
    const double end = c.closed() ? c.length() : c.length() - 1.0;
    for (double s = 0.0; s < end; s += 0.7) {
      const PathPoint p = c.at_arc(s);
      const double d = off(rng);
      const Eigen::Vector2d q(p.x - std::sin(p.theta) * d, p.y + std::cos(p.theta) * d);
      const NearestResult g = nearest_point(c, q);
      const NearestResult h = nearest_point(c, q, hint);
      ASSERT_NEAR(h.distance, g.distance, 1e-9) << "s=" << s;
      hint = h.index;
    }
  }
}

TEST(TrackingErrors, OnPathAligned) {
  VehicleParams p;
  const Course c = gen_straight(100, 0.25);
  const TrackingError e = tracking_errors(c, at(10, 0, 0), p, ReferencePoint::CenterOfGravity);
  EXPECT_EQ(e.e, 0.0);
  EXPECT_EQ(e.theta_e, 0.0);
}

TEST(TrackingErrors, LeftOfPathIsPositive) {
  VehicleParams p;
  const Course c = gen_straight(100, 0.25);
  const TrackingError e = tracking_errors(c, at(10, 1, 0), p, ReferencePoint::CenterOfGravity);
  EXPECT_NEAR(e.e, 1.0, 1e-12);
  EXPECT_EQ(e.theta_e, 0.0);
}

TEST(TrackingErrors, HeadingOffset) {
  VehicleParams p;
  const Course c = gen_straight(100, 0.25);
  const TrackingError e = tracking_errors(c, at(10, 0, 0.2), p, ReferencePoint::CenterOfGravity);
  EXPECT_NEAR(e.e, 0.0, 1e-12);
  EXPECT_NEAR(e.theta_e, 0.2, 1e-12);
}

TEST(TrackingErrors, FrontAxleUsesWheelbaseOffset) {
  VehicleParams p;
  const Course c = gen_straight(100, 0.25);
  const TrackingError e = tracking_errors(c, at(10, 0, 0.1, Anchor::RearAxle), p, ReferencePoint::FrontAxle);
  EXPECT_NEAR(e.e, p.wheelbase * std::sin(0.1), 1e-9);
}

TEST(TrackingErrorsProperty, MirroringFlipsSign) {
  VehicleParams p;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.2, 2.0), sx(20, 150);
  const Course c = gen_sine(3, 50, 200, 0.1);
  for (int i = 0; i < 100; ++i) {
    const PathPoint q = c.at_arc(sx(rng));
    const double d = u(rng);
    const Eigen::Vector2d n(-std::sin(q.theta), std::cos(q.theta));
    const SimState l = at(q.x + d * n.x(), q.y + d * n.y(), q.theta);
    const SimState r = at(q.x - d * n.x(), q.y - d * n.y(), q.theta);
    const double el = tracking_errors(c, l, p, ReferencePoint::CenterOfGravity).e;
    const double er = tracking_errors(c, r, p, ReferencePoint::CenterOfGravity).e;
    EXPECT_GT(el, 0.0);
    EXPECT_LT(er, 0.0);
    EXPECT_NEAR(el, -er, 0.02 * d);
  }
}

TEST(Lookahead, StraightAlignedIsZero) {
  const Course c = gen_straight(100, 0.25);
  for (double ld : {1.0, 5.0, 17.0}) {
    const LookaheadResult r = lookahead_point(c, {10, 0}, 0.0, ld);
    EXPECT_NEAR(r.e_ld, 0.0, 1e-12);
    EXPECT_NEAR(r.goal.x, 10 + ld, 1e-9);
  }
}

TEST(Lookahead, CircleChordOffset) {
  const double r = 50.0;
  const Course c = gen_circle(r, 0.05);
  for (double ld : {2.0, 4.0}) {
    const LookaheadResult res = lookahead_point(c, {r, 0}, kPi / 2, ld);
    EXPECT_NEAR(res.e_ld, ld * ld / (2 * r), 2e-3 * ld * ld / (2 * r));
  }
}

TEST(Lookahead, EndOfOpenCourseIsSignalled) {
  const Course c = gen_straight(20, 0.25);
  EXPECT_THROW(lookahead_point(c, {18, 0}, 0.0, 5.0), EndOfCourse);
  EXPECT_THROW(lookahead_point(c, {5, 0}, 0.0, 0.0), DomainError);
}

TEST(CourseCsv, RoundTrip) {
  const Course c = gen_sine(3, 50, 40, 0.5);
  std::stringstream ss;
  write_course_csv(ss, c);
  EXPECT_EQ(ss.str().substr(0, 20), "s,x,y,theta_p,kappa\n");
  const Course d = read_course_csv(ss, false);
  ASSERT_EQ(d.size(), c.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    EXPECT_EQ(d[i].x, c[i].x);
    EXPECT_EQ(d[i].kappa, c[i].kappa);
  }
}

TEST(CourseCsv, RejectsBadHeader) {
  std::stringstream ss("a,b\n1,2\n");
  EXPECT_THROW(read_course_csv(ss, false), ConfigError);
}
