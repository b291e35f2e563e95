#include <gtest/gtest.h>

#include "pathtrack/harness.hpp"
#include "pathtrack/lateral.hpp"

using namespace pathtrack;

namespace pathtrack {
void PrintTo(ControllerType c, std::ostream* os) { *os << to_string(c); }
}  // namespace pathtrack

namespace {

VehicleParams wheelbase(double l) {
  VehicleParams p;
  p.wheelbase = l;
  p.lf = l / 2;
  p.lr = l / 2;
  return p;
}

}  // namespace

TEST(PurePursuitLaw, HandExample) {
  EXPECT_NEAR(pure_pursuit_law(1.0, 5.0, wheelbase(2.5)), 0.19740, 1e-5);
}

TEST(PurePursuitLaw, ZeroOffsetAndSymmetry) {
  const VehicleParams p;
  EXPECT_EQ(pure_pursuit_law(0.0, 5.0, p), 0.0);
  EXPECT_EQ(pure_pursuit_law(-0.7, 5.0, p), -pure_pursuit_law(0.7, 5.0, p));
}

TEST(PurePursuitLaw, ClampedToMaxSteer) {
  const VehicleParams p;
  EXPECT_EQ(pure_pursuit_law(100.0, 1.0, p), p.max_steer);
}

TEST(PurePursuitConfig, LookaheadLaws) {
  PurePursuitConfig c;
  c.law = LookaheadLaw::Linear;
  c.k = 0.2;
  c.d = 2.5;
  EXPECT_DOUBLE_EQ(c.lookahead(10.0), 4.5);
  c.law = LookaheadLaw::Fixed;
  EXPECT_DOUBLE_EQ(c.lookahead(10.0), 2.5);
  c.law = LookaheadLaw::SqrtGain;
  c.k = 0.25;
  EXPECT_DOUBLE_EQ(c.lookahead(8.0), 4.0);
  EXPECT_DOUBLE_EQ(c.lookahead(0.0), c.min_lookahead);
}

TEST(PurePursuit, OnStraightPathCommandsZero) {
  const Course c = gen_straight(100, 0.25);
  SimState s;
  s.x = 10;
  s.vx = 3;
  EXPECT_NEAR(pure_pursuit(s, c, {}, {}).delta, 0.0, 1e-12);
  s.y = 1.0;
  EXPECT_LT(pure_pursuit(s, c, {}, {}).delta, 0.0);
}

TEST(StanleyLaw, HandExample) {
  StanleyConfig c;
  c.k = 1.0;
  c.v_eps = 0.1;
  VehicleParams p;
  p.max_steer = 1.0;
  EXPECT_NEAR(stanley_law(0.0, 0.9, 0.9, c, p), 0.73282, 1e-5);
  EXPECT_NEAR(stanley_law(0.1, 0.0, 5.0, c, p), 0.1, 1e-15);
}

TEST(StanleyLaw, ClampedAndOdd) {
  StanleyConfig c;
  const VehicleParams p;
  EXPECT_EQ(stanley_law(1.0, 10.0, 1.0, c, p), p.max_steer);
  EXPECT_EQ(stanley_law(-0.2, -0.3, 4.0, c, p), -stanley_law(0.2, 0.3, 4.0, c, p));
}

TEST(Stanley, SteersBackTowardPath) {
  const Course c = gen_straight(100, 0.25);
  SimState s;
  s.x = 10;
  s.y = 0.5;
  s.vx = 3;
  EXPECT_LT(stanley(s, c, {}, {}).delta, 0.0);
  s.y = -0.5;
  EXPECT_GT(stanley(s, c, {}, {}).delta, 0.0);
}

TEST(SteeringPid, SignConvention) {
  SteeringPidConfig cfg;
  cfg.gains = {0.8, 0.0, 0.0};
  SteeringPid pid(cfg, {});
  EXPECT_NEAR(pid.step(0.25, 0.02), -0.2, 1e-15);
}

TEST(SteeringPid, ResetClearsState) {
  SteeringPid pid({}, {});
  pid.step(0.3, 0.02);
  pid.step(0.3, 0.02);
  EXPECT_NE(pid.state().integral, 0.0);
  pid.reset();
  EXPECT_EQ(pid.state().integral, 0.0);
  EXPECT_FALSE(pid.state().has_prev);
}

class OffsetConvergence : public ::testing::TestWithParam<ControllerType> {};

TEST_P(OffsetConvergence, OneMetreOffsetConvergesWithin60m) {
  ScenarioConfig cfg;
  cfg.controller.type = GetParam();
  cfg.course.type = CourseType::Straight;
  cfg.initial.lateral_offset = 1.0;
  const RunRecord r = run_scenario(cfg);
  ASSERT_EQ(r.termination, Termination::Completed) << r.message;
  const MetricsSummary m = summarize(r);
  EXPECT_LT(m.converge_distance, 60.0);
  EXPECT_LT(m.steady_state, 0.05);
}

INSTANTIATE_TEST_SUITE_P(Controllers, OffsetConvergence,
                         ::testing::Values(ControllerType::PurePursuit, ControllerType::Stanley,
                                           ControllerType::Pid, ControllerType::Lqr,
                                           ControllerType::Mpc),
                         [](const auto& info) { return to_string(info.param); });
