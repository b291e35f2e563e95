#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>
#include <random>
#include <sstream>

#include "pathtrack/estimation.hpp"
#include "pathtrack/common.hpp"

using namespace pathtrack;

namespace {

bool is_psd(const Eigen::Matrix3d& p) {
  if (!p.isApprox(p.transpose(), 1e-12) && (p - p.transpose()).cwiseAbs().maxCoeff() > 1e-12) return false;
  return Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(p).eigenvalues().minCoeff() >= -1e-12;
}

SensorNoiseConfig quiet() {
  SensorNoiseConfig c;
  c.wheel_speed_std = 0.0;
  c.yaw_rate_std = 0.0;
  c.yaw_rate_bias = 0.0;
  c.heading_std = 0.0;
  return c;
}

}  // namespace

TEST(Stadium, ClosesAndHasRequestedLength) {
  const auto truth = stadium_of_length(235.0, 20.0, 5.0, 100.0);
  EXPECT_NEAR(truth.front().x, truth.back().x, 1e-9);
  EXPECT_NEAR(truth.front().y, truth.back().y, 1e-9);
  double len = 0.0;
  for (std::size_t i = 1; i < truth.size(); ++i) {
    len += std::hypot(truth[i].x - truth[i - 1].x, truth[i].y - truth[i - 1].y);
  }
  EXPECT_NEAR(len, 235.0, 0.01);
  EXPECT_THROW(stadium_of_length(100.0, 20.0, 5.0, 100.0), DomainError);
}

TEST(Sensors, NoiseFreeMatchesTruth) {
  const auto truth = stadium_truth(30.0, 10.0, 4.0, 100.0);
  const auto s = simulate_sensors(truth, quiet());
  ASSERT_EQ(s.size(), truth.size());
  int headings = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(s[i].wheel_speed, truth[i].v);
    if (i + 1 < s.size()) {
      const double mean_rate = wrap_angle(truth[i + 1].theta - truth[i].theta) / (truth[i + 1].t - truth[i].t);
      ASSERT_NEAR(s[i].yaw_rate, mean_rate, 1e-9);
      if (truth[i].omega == truth[i + 1].omega) ASSERT_NEAR(s[i].yaw_rate, truth[i].omega, 1e-9);
    }
    if (s[i].heading) {
      ++headings;
      EXPECT_NEAR(wrap_angle(*s[i].heading - truth[i].theta), 0.0, 1e-12);
    }
  }
  EXPECT_NEAR(headings, truth.back().t * 10.0, 2.0);
}

TEST(Sensors, DeterministicPerSeed) {
  const auto truth = stadium_truth(30.0, 10.0, 4.0, 100.0);
  SensorNoiseConfig c;
  const auto a = simulate_sensors(truth, c);
  const auto b = simulate_sensors(truth, c);
  c.seed = 2;
  const auto d = simulate_sensors(truth, c);
  for (std::size_t i = 0; i < a.size(); ++i) ASSERT_EQ(a[i].yaw_rate, b[i].yaw_rate);
  EXPECT_NE(a[5].yaw_rate, d[5].yaw_rate);
}

TEST(Ekf, PredictionFollowsUnicycle) {
  EkfState s;
  s.mean = {1.0, 2.0, 0.5};
  const EkfState n = ekf_predict(s, 2.0, 0.0, 0.1, {});
  EXPECT_NEAR(n.mean.x(), 1.0 + 0.2 * std::cos(0.5), 1e-12);
  EXPECT_NEAR(n.mean.y(), 2.0 + 0.2 * std::sin(0.5), 1e-12);
  EXPECT_NEAR(n.mean.z(), 0.5, 1e-15);
  EXPECT_EQ(n.cov.norm(), 0.0);
}

TEST(Ekf, HeadingUpdatePullsTowardMeasurement) {
  EkfState s;
  s.mean = {0.0, 0.0, 0.1};
  s.cov = Eigen::Matrix3d::Identity() * 0.01;
  const EkfState a = ekf_update_heading(s, 0.3, 0.01);
  EXPECT_NEAR(a.mean.z(), 0.2, 1e-12);
  EXPECT_NEAR(a.cov(2, 2), 0.005, 1e-12);
  const EkfState b = ekf_update_heading(s, 0.3, 1e-12);
  EXPECT_NEAR(b.mean.z(), 0.3, 1e-9);
}

TEST(Ekf, HeadingInnovationIsWrapped) {
  EkfState s;
  s.mean = {0.0, 0.0, kPi - 0.05};
  s.cov = Eigen::Matrix3d::Identity() * 0.01;
  const EkfState a = ekf_update_heading(s, -kPi + 0.05, 0.01);
  EXPECT_NEAR(std::abs(a.mean.z()), kPi, 1e-9);
}

TEST(EkfProperty, CovarianceStaysPsdOver1e5Steps) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  EkfNoise noise;
  noise.q_process = Eigen::Vector3d(1e-4, 1e-4, 1e-6).asDiagonal();
  noise.wheel_speed_std = 0.05;
  noise.yaw_rate_std = 0.01;
  EkfState s;
  for (int k = 0; k < 100000; ++k) {
    s = ekf_predict(s, 5.0 + n(rng), 0.2 * n(rng), 0.01, noise);
    if (k % 10 == 0) s = ekf_update_heading(s, n(rng), 1e-4);
    if (k % 997 == 0) ASSERT_TRUE(is_psd(s.cov)) << "step " << k;
  }
  EXPECT_TRUE(is_psd(s.cov));
}

TEST(LoopClosure, ZeroNoiseIsTiny) {
  const auto truth = stadium_of_length(235.0, 20.0, 5.0, 100.0);
  SensorNoiseConfig c = quiet();
  const auto sensors = simulate_sensors(truth, c);
  const DeadReckoningResult r = run_dead_reckoning(truth, sensors, matched_noise(c), 1e-6);
  EXPECT_LT(r.closure.ratio, 0.001);
  EXPECT_NEAR(r.closure.length, 235.0, 0.01);
}

TEST(LoopClosure, ExampleRatio) {
  const std::vector<Eigen::Vector3d> est{{0, 0, 0}, {5, 0, 0}, {0, 0.3, 0}};
  const std::vector<TruthSample> truth{{0, 0, 0, 0, 1, 0}, {1, 5, 0, 0, 1, 0}, {2, 0, 0, 0, 1, 0}};
  const LoopClosure l = loop_closure_error(est, truth);
  EXPECT_NEAR(l.closure, 0.3, 1e-12);
  EXPECT_NEAR(l.length, 10.0, 1e-12);
  EXPECT_NEAR(l.ratio, 0.03, 1e-12);
}

TEST(EkfProperty, ThreeSigmaConsistencyWithoutBias) {
  const auto truth = stadium_of_length(235.0, 20.0, 5.0, 100.0);
  SensorNoiseConfig c;
  c.yaw_rate_bias = 0.0;
  int inside = 0, total = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    c.seed = seed;
    const auto sensors = simulate_sensors(truth, c);
    const DeadReckoningResult r =
        run_dead_reckoning(truth, sensors, matched_noise(c), c.heading_std * c.heading_std);
    for (std::size_t i = 100; i < truth.size(); i += 50) {
      const double ex = r.estimate[i].x() - truth[i].x;
      const double ey = r.estimate[i].y() - truth[i].y;
      const double et = wrap_angle(r.estimate[i].z() - truth[i].theta);
      ++total;
      if (std::abs(ex) <= 3 * std::sqrt(r.cov[i](0, 0)) && std::abs(ey) <= 3 * std::sqrt(r.cov[i](1, 1)) &&
          std::abs(et) <= 3 * std::sqrt(r.cov[i](2, 2))) {
        ++inside;
      }
    }
  }
  EXPECT_GE(static_cast<double>(inside) / total, 0.95);
}

TEST(EkfCsv, HeaderAndRows) {
  const auto truth = stadium_truth(10.0, 5.0, 2.0, 10.0);
  SensorNoiseConfig c = quiet();
  const DeadReckoningResult r = run_dead_reckoning(truth, simulate_sensors(truth, c), matched_noise(c), 1e-6);
  std::ostringstream os;
  write_ekf_csv(os, truth, r);
  const std::string s = os.str();
  EXPECT_EQ(s.substr(0, s.find('\n')),
            "t,x_true,y_true,theta_true,x_est,y_est,theta_est,var_x,var_y,var_theta");
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), truth.size() + 1);
}
