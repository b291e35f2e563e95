#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "pathtrack/sysid.hpp"

using namespace pathtrack;

namespace {

LongitudinalPlant plant(double k, double t1, double t2, double delay = 0.0) {
  LongitudinalPlant p;
  p.gain = k;
  p.tau1 = t1;
  p.tau2 = t2;
  p.delay = delay;
  return p;
}

}  // namespace

TEST(Arx, CoefficientsMatchSampledPoles) {
  const double dt = 0.05;
  const ArxCoefficients c = arx_coefficients(plant(3, 2, 0.5), dt);
  const double p1 = std::exp(-dt / 2), p2 = std::exp(-dt / 0.5);
  EXPECT_NEAR(c.a1, p1 + p2, 1e-14);
  EXPECT_NEAR(c.a2, -p1 * p2, 1e-14);
  // Unit DC gain of the ARX model equals K.
  EXPECT_NEAR(c.b1 / (1 - c.a1 - c.a2), 3.0, 1e-9);
}

TEST(Arx, ExactRecoveryFromNoiseFreeData) {
  for (Waveform w : {Waveform::Square, Waveform::Sine}) {
    Excitation e;
    e.waveform = w;
    const ArxFit f = fit_arx2(excite(plant(3, 2, 0.5), e));
    EXPECT_NEAR(f.plant.gain, 3.0, 1e-6);
    EXPECT_NEAR(f.plant.tau1, 2.0, 1e-6);
    EXPECT_NEAR(f.plant.tau2, 0.5, 1e-6);
    EXPECT_GT(f.r2, 0.999999);
  }
}

TEST(Arx, SmallMeasurementNoiseStaysWithinFivePercent) {
  Excitation e;
  e.duration = 400.0;
  IoRecord r = excite(plant(3, 2, 0.5), e);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 1e-4);
  for (double& v : r.v) v += n(rng);
  const ArxFit f = fit_arx2(r);
  EXPECT_NEAR(f.plant.gain, 3.0, 0.15);
  EXPECT_NEAR(f.plant.tau1, 2.0, 0.1);
}

TEST(Arx, RejectsConstantInput) {
  Excitation e;
  e.amplitude = 0.0;
  EXPECT_THROW(fit_arx2(excite(plant(3, 2, 0.5), e)), DomainError);
}

TEST(Arx, SimulatorDcGainMatchesDrivetrain) {
  VehicleParams p;
  Excitation e;
  e.period = 40.0;
  e.duration = 200.0;
  const ArxFit f = fit_arx2(excite(p, p.mass, e));
  const double dc = p.drivetrain.max_drive_force / p.drivetrain.drag;
  EXPECT_NEAR(f.plant.gain, dc, 0.02 * dc);
  EXPECT_NEAR(f.plant.tau1, p.mass / p.drivetrain.drag, 0.02 * p.mass / p.drivetrain.drag);
}

TEST(IoCsv, RoundTrip) {
  Excitation e;
  e.period = 1.0;
  e.duration = 4.0;
  const IoRecord r = excite(plant(1, 1, 0.1), e);
  std::stringstream ss;
  write_io_csv(ss, r);
  EXPECT_EQ(ss.str().substr(0, 6), "t,u,v\n");
  const IoRecord back = read_io_csv(ss);
  ASSERT_EQ(back.v.size(), r.v.size());
  for (std::size_t i = 0; i < r.v.size(); ++i) EXPECT_EQ(back.v[i], r.v[i]);
}

TEST(Tuning, MeetsSpecOnPlant) {
  TuningSpec spec;
  const TuningResult t = tune_pid_from_model(plant(3, 2, 0.5), spec);
  EXPECT_TRUE(t.report.passes);
  EXPECT_NEAR(t.report.metrics.rise_time, spec.rise_time, 0.1 * spec.rise_time);
}

TEST(TuningProperty, FasterRiseNeedsLargerProportionalGain) {
  double last = 0.0;
  for (double rise : {4.0, 3.0, 2.0, 1.5, 1.0}) {
    TuningSpec spec;
    spec.rise_time = rise;
    const TuningResult t = tune_pid_from_model(plant(3, 2, 0.5), spec);
    EXPECT_GT(t.gains.kp, last) << "rise " << rise;
    last = t.gains.kp;
  }
}

TEST(SpeedStep, AdaptiveZeroRatesMatchesSimple) {
  VehicleParams p;
  AdaptivePidConfig cfg;
  cfg.initial = {0.36, 0.0005, 0.11};
  cfg.gamma_p = cfg.gamma_i = cfg.gamma_d = 0.0;
  const SpeedStepResult a = simulate_speed_step(p, p.mass, cfg, true);
  const SpeedStepResult s = simulate_speed_step(p, p.mass, cfg, false);
  ASSERT_EQ(a.record.v.size(), s.record.v.size());
  for (std::size_t i = 0; i < a.record.v.size(); ++i) ASSERT_EQ(a.record.v[i], s.record.v[i]);
}

TEST(SpeedStep, HeavierVehicleRisesSlower) {
  VehicleParams p;
  AdaptivePidConfig cfg;
  cfg.initial = {0.36, 0.0005, 0.11};
  const SpeedStepResult light = simulate_speed_step(p, p.mass, cfg, false);
  const SpeedStepResult heavy = simulate_speed_step(p, p.mass + 180.0, cfg, false);
  EXPECT_GT(heavy.metrics.rise_time, light.metrics.rise_time);
}

namespace {

std::vector<LateralSample> lateral_log(const VehicleParams& p, double vx, double amplitude, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  SimState s;
  s.vx = vx;
  s.anchor = Anchor::CenterOfGravity;
  std::vector<LateralSample> out;
  double delta = 0.0;
  const double dt = 0.001;
  for (int k = 0; k <= 20000; ++k) {
    if (k % 500 == 0) delta = amplitude * u(rng);
    out.push_back({k * dt, s.vx, s.vy, s.omega, delta});
    s = step_dynamic(s, delta, p, dt);
  }
  return out;
}

}  // namespace

TEST(Stiffness, RecoveredWithinOneTenthPercent) {
  VehicleParams p;
  p.cf = 38000.0;
  p.cr = 47000.0;
  const auto log = lateral_log(p, 8.0, 0.05, 1);
  VehicleParams prior = p;
  prior.cf = prior.cr = 1.0;
  const StiffnessEstimate e = estimate_cornering_stiffness(log, prior, 20);
  EXPECT_NEAR(e.cf, p.cf, 1e-3 * p.cf);
  EXPECT_NEAR(e.cr, p.cr, 1e-3 * p.cr);
}

TEST(StiffnessProperty, InvariantToExcitationScale) {
  VehicleParams p;
  const StiffnessEstimate a = estimate_cornering_stiffness(lateral_log(p, 8.0, 0.02, 4), p, 20);
  const StiffnessEstimate b = estimate_cornering_stiffness(lateral_log(p, 8.0, 0.08, 4), p, 20);
  EXPECT_NEAR(a.cf, b.cf, 1e-6 * a.cf);
  EXPECT_NEAR(a.cr, b.cr, 1e-6 * a.cr);
}

TEST(Stiffness, RejectsLowSpeed) {
  VehicleParams p;
  std::vector<LateralSample> log(30, LateralSample{0, 0.2, 0, 0, 0});
  for (std::size_t i = 0; i < log.size(); ++i) log[i].t = 0.01 * i;
  EXPECT_THROW(estimate_cornering_stiffness(log, p, 20), DomainError);
}
