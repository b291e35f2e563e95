#include <gtest/gtest.h>

#include <random>

#include "pathtrack/mpc.hpp"

using namespace pathtrack;

namespace {

MpcProblem problem(const PathPoly& poly, double v = 5.0) {
  MpcProblem pb;
  pb.poly = poly;
  pb.v = v;
  pb.wheelbase = 2.258;
  return pb;
}

PathPoly poly(double c0, double c1 = 0, double c2 = 0, double c3 = 0) {
  PathPoly p;
  p.c = {c0, c1, c2, c3};
  return p;
}

SimState pose(double x, double y, double theta) {
  SimState s;
  s.x = x;
  s.y = y;
  s.theta = theta;
  s.vx = 5.0;
  return s;
}

}  // namespace

TEST(FitPathLocal, StraightAlignedIsZero) {
  const Course c = gen_straight(100, 0.25);
  const PolyFit f = fit_path_local(c, pose(10, 0, 0), {});
  for (double v : f.poly.c) EXPECT_NEAR(v, 0.0, 1e-9);
}

TEST(FitPathLocal, LeftOffsetGivesNegativeConstant) {
  const Course c = gen_straight(100, 0.25);
  const PolyFit f = fit_path_local(c, pose(10, 1, 0), {});
  EXPECT_NEAR(f.poly.c[0], -1.0, 1e-9);
  EXPECT_NEAR(f.poly.c[1], 0.0, 1e-9);
}

TEST(FitPathLocal, SineResidualIsSmall) {
  const Course c = gen_sine(3, 50, 200, 0.25);
  const PolyFit f = fit_path_local(c, pose(c.at_arc(60).x, c.at_arc(60).y, c.at_arc(60).theta), {}, 20.0);
  EXPECT_LT(f.rms_residual, 0.05);
}

TEST(FitPathLocal, EndOfCourse) {
  const Course c = gen_straight(20, 0.25);
  EXPECT_THROW(fit_path_local(c, pose(20, 0, 0), {}, 20.0, 0.0), EndOfCourse);
}

TEST(Mpc, ZeroErrorIsGlobalMinimum) {
  const MpcSolution s = mpc_solve(problem(poly(0)));
  EXPECT_TRUE(s.converged);
  EXPECT_EQ(s.cost, 0.0);
  for (double d : s.deltas) EXPECT_EQ(d, 0.0);
}

TEST(Mpc, OneStepHeadingCaseMatchesClosedForm) {
  // N = 2: psi_1 = -atan(c1) + (v / L) dt delta_0 is linear in delta_0.
  MpcProblem pb = problem(poly(0.0, 0.3));
  pb.cfg.horizon = 2;
  pb.cfg.w_cte = 0.0;
  pb.cfg.w_psi = 1000.0;
  pb.cfg.w_delta = 5.0;
  pb.cfg.w_ddelta = 200.0;
  pb.cfg.tol = 1e-12;
  pb.prev_delta = 0.05;
  const double turn = pb.v / pb.wheelbase * pb.cfg.dt;
  const double psi0 = -std::atan(0.3);
  const double expected = (-pb.cfg.w_psi * turn * psi0 + pb.cfg.w_ddelta * pb.prev_delta) /
                          (pb.cfg.w_psi * turn * turn + pb.cfg.w_delta + pb.cfg.w_ddelta);
  ASSERT_LT(std::abs(expected), pb.cfg.bound);
  const MpcSolution s = mpc_solve(pb);
  ASSERT_EQ(s.deltas.size(), 1u);
  EXPECT_NEAR(s.deltas[0], expected, 1e-8);
}

TEST(MpcProperty, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    MpcProblem pb = problem(poly(u(rng), 0.3 * u(rng), 0.02 * u(rng), 0.002 * u(rng)), 3.0 + 7.0 * std::abs(u(rng)));
    pb.prev_delta = 0.2 * u(rng);
    std::vector<double> d(static_cast<std::size_t>(pb.cfg.horizon - 1));
    for (double& x : d) x = 0.4 * u(rng);
    std::vector<double> g(d.size());
    mpc_cost(pb, d, g);
    const double h = 1e-5;
    for (std::size_t i = 0; i < d.size(); ++i) {
      std::vector<double> dp = d, dm = d;
      dp[i] += h;
      dm[i] -= h;
      const double fd = (mpc_cost(pb, dp) - mpc_cost(pb, dm)) / (2 * h);
      const double rel = std::abs(fd - g[i]) / std::max(1.0, std::abs(fd));
      ASSERT_LT(rel, 1e-4) << "trial " << trial << " input " << i;
      ++checked;
    }
  }
  EXPECT_EQ(checked, 900);
}

TEST(MpcProperty, CostNonIncreasingAndBoundRespected) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    MpcProblem pb = problem(poly(2.0 * u(rng), 0.5 * u(rng), 0.03 * u(rng)), 2.0 + 8.0 * std::abs(u(rng)));
    pb.max_step = trial % 2 ? 0.08 : 0.0;
    pb.prev_delta = 0.3 * u(rng);
    const MpcSolution s = mpc_solve(pb);
    for (std::size_t i = 1; i < s.cost_history.size(); ++i) {
      ASSERT_LE(s.cost_history[i], s.cost_history[i - 1]);
    }
    for (double d : s.deltas) ASSERT_LE(std::abs(d), pb.cfg.bound);
  }
}

TEST(MpcProject, BoxOnlyClamps) {
  MpcProblem pb = problem(poly(0));
  const std::vector<double> in{1.0, -1.0, 0.1};
  const std::vector<double> out = mpc_project(pb, in);
  EXPECT_EQ(out, (std::vector<double>{pb.cfg.bound, -pb.cfg.bound, 0.1}));
}

TEST(MpcProject, RateConstraintFeasibleAndIdempotent) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  MpcProblem pb = problem(poly(0));
  pb.max_step = 0.08;
  for (int trial = 0; trial < 200; ++trial) {
    pb.prev_delta = 0.4 * u(rng);
    std::vector<double> z(9);
    for (double& v : z) v = u(rng);
    const std::vector<double> x = mpc_project(pb, z);
    double prev = pb.prev_delta;
    for (double v : x) {
      ASSERT_LE(std::abs(v), pb.cfg.bound);
      ASSERT_LE(std::abs(v - prev), pb.max_step + 1e-6);
      prev = v;
    }
    const std::vector<double> again = mpc_project(pb, x);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(again[i], x[i], 1e-6);
  }
}

TEST(MpcProject, IsNearestFeasiblePoint) {
  // Compare with a brute-force search over feasible perturbations.
  MpcProblem pb = problem(poly(0));
  pb.max_step = 0.1;
  pb.prev_delta = 0.0;
  const std::vector<double> z{0.5, -0.2};
  const std::vector<double> x = mpc_project(pb, z);
  const double best = std::hypot(x[0] - z[0], x[1] - z[1]);
  for (double a = -0.1; a <= 0.1; a += 0.001) {
    for (double b = a - 0.1; b <= a + 0.1; b += 0.001) {
      if (std::abs(b) > pb.cfg.bound) continue;
      ASSERT_GE(std::hypot(a - z[0], b - z[1]), best - 1e-9);
    }
  }
}

TEST(Mpc, SteersTowardPathOnOffset) {
  const MpcSolution s = mpc_solve(problem(poly(-1.0)));
  EXPECT_LT(s.deltas.front(), 0.0);
  const MpcSolution t = mpc_solve(problem(poly(1.0)));
  EXPECT_GT(t.deltas.front(), 0.0);
}

TEST(Mpc, WarmStartNeedsFewerIterationsOnSmoothPath) {
  const Course c = gen_sine(3, 50, 200, 0.25);
  VehicleParams p;
  MpcConfig cfg;
  std::vector<int> cold, warm;
  std::vector<double> prev;
  for (double s = 20.0; s < 150.0; s += 0.5) {
    const PathPoint q = c.at_arc(s);
    const SimState st = pose(q.x, q.y, q.theta);
    const PolyFit f = fit_path_local(c, st, p);
    const MpcSolution a = mpc_solve(cfg, st, f.poly, p);
    const MpcSolution b = mpc_solve(cfg, st, f.poly, p, shift_warm_start(prev, 0.5 / (5.0 * cfg.dt)));
    cold.push_back(a.iterations);
    warm.push_back(b.iterations);
    prev = b.deltas;
  }
  auto median = [](std::vector<int> v) {
    std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
    return v[v.size() / 2];
  };
  EXPECT_LT(median(warm), median(cold));
}

TEST(ShiftWarmStart, Examples) {
  const std::vector<double> prev{1, 2, 3};
  EXPECT_EQ(shift_warm_start(prev, 1.0), (std::vector<double>{2, 3, 3}));
  EXPECT_EQ(shift_warm_start(prev, 0.5), (std::vector<double>{1.5, 2.5, 3}));
  EXPECT_THROW(shift_warm_start(prev, -1.0), DomainError);
}
