#include "pathtrack/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "pathtrack/common.hpp"

namespace pathtrack {

void SensorNoiseConfig::validate() const {
  for (double v : {wheel_speed_std, yaw_rate_std, heading_std}) {
    if (!(v >= 0.0)) throw DomainError("sensor noise std must be non-negative");
  }
  if (!(odom_rate > 0.0) || !(heading_rate > 0.0)) throw DomainError("sensor rates must be positive");
  require_finite(wheel_scale_error, "wheel scale error");
  require_finite(yaw_rate_bias, "yaw rate bias");
}

std::vector<SensorSample> simulate_sensors(std::span<const TruthSample> truth,
                                           const SensorNoiseConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);
  std::vector<SensorSample> out;
  out.reserve(truth.size());
  const double heading_period = 1.0 / cfg.heading_rate;
  double next_heading = truth.empty() ? 0.0 : truth.front().t;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const TruthSample& s = truth[i];
    if (i > 0 && !(s.t > truth[i - 1].t)) throw DomainError("truth trajectory must be time ordered");
    SensorSample m;
    m.t = s.t;
    m.dt = i + 1 < truth.size() ? truth[i + 1].t - s.t : 0.0;
    const double nv = unit(rng);
    const double nw = unit(rng);
    m.wheel_speed = s.v * (1.0 + cfg.wheel_scale_error) + cfg.wheel_speed_std * nv;
    // Integrating gyro: mean rate over the interval to the next sample.
    const double rate = i + 1 < truth.size() ? wrap_angle(truth[i + 1].theta - s.theta) / m.dt : s.omega;
    m.yaw_rate = rate + cfg.yaw_rate_bias + cfg.yaw_rate_std * nw;
    if (s.t + 1e-9 >= next_heading) {
      m.heading = wrap_angle(s.theta + cfg.heading_std * unit(rng));
      next_heading += heading_period;
    }
    out.push_back(m);
  }
  return out;
}

namespace {

Eigen::Matrix3d symmetrize(const Eigen::Matrix3d& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

EkfState ekf_predict(const EkfState& ekf, double wheel_speed, double yaw_rate, double dt,
                     const EkfNoise& noise) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  require_finite(wheel_speed, "wheel speed");
  require_finite(yaw_rate, "yaw rate");
  // Midpoint heading, exact for constant-rate arcs to second order.
  const double th = ekf.mean[2] + 0.5 * yaw_rate * dt;
  const double c = std::cos(th);
  const double s = std::sin(th);
  EkfState out;
  out.mean = ekf.mean + Eigen::Vector3d(wheel_speed * c * dt, wheel_speed * s * dt, yaw_rate * dt);
  out.mean[2] = wrap_angle(out.mean[2]);

  Eigen::Matrix3d f = Eigen::Matrix3d::Identity();
  f(0, 2) = -wheel_speed * s * dt;
  f(1, 2) = wheel_speed * c * dt;
  Eigen::Matrix<double, 3, 2> g;
  g << c * dt, -0.5 * wheel_speed * s * dt * dt, s * dt, 0.5 * wheel_speed * c * dt * dt, 0.0, dt;
  const Eigen::Vector2d input_var(noise.wheel_speed_std * noise.wheel_speed_std,
                                  noise.yaw_rate_std * noise.yaw_rate_std);
  out.cov = symmetrize(f * ekf.cov * f.transpose() + g * input_var.asDiagonal() * g.transpose() +
                       noise.q_process * dt);
  return out;
}

EkfState ekf_update_heading(const EkfState& ekf, double heading, double r_meas) {
  if (!(r_meas > 0.0)) throw DomainError("measurement variance must be positive");
  require_finite(heading, "heading");
  const Eigen::RowVector3d h(0.0, 0.0, 1.0);
  const double innovation = wrap_angle(heading - ekf.mean[2]);
  const double s = ekf.cov(2, 2) + r_meas;
  const Eigen::Vector3d k = ekf.cov.col(2) / s;
  EkfState out;
  out.mean = ekf.mean + k * innovation;
  out.mean[2] = wrap_angle(out.mean[2]);
  const Eigen::Matrix3d ikh = Eigen::Matrix3d::Identity() - k * h;
  out.cov = symmetrize(ikh * ekf.cov * ikh.transpose() + r_meas * k * k.transpose());
  return out;
}

LoopClosure loop_closure_error(std::span<const Eigen::Vector3d> estimated,
                               std::span<const TruthSample> truth) {
  if (estimated.size() < 2 || truth.size() < 2) throw DomainError("trajectories too short");
  LoopClosure out;
  for (std::size_t i = 1; i < truth.size(); ++i) {
    out.length += std::hypot(truth[i].x - truth[i - 1].x, truth[i].y - truth[i - 1].y);
  }
  const double gap = std::hypot(truth.back().x - truth.front().x, truth.back().y - truth.front().y);
  if (gap > 1e-6 * std::max(1.0, out.length)) throw DomainError("truth path is not closed");
  out.closure = (estimated.back().head<2>() - estimated.front().head<2>()).norm();
  out.ratio = out.closure / out.length;
  return out;
}

std::vector<TruthSample> stadium_truth(double straight, double radius, double speed, double rate) {
  if (!(straight >= 0.0 && radius > 0.0 && speed > 0.0 && rate > 0.0)) {
    throw DomainError("stadium dimensions, speed and rate must be positive");
  }
  const double arc = kPi * radius;
  const double total = 2.0 * (straight + arc);
  const auto n = static_cast<std::size_t>(std::llround(total / speed * rate));
  const double dt = total / speed / static_cast<double>(n);
  const double omega = speed / radius;

  std::vector<TruthSample> out(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double s = std::min(speed * dt * static_cast<double>(i), total);
    TruthSample& p = out[i];
    p.t = dt * static_cast<double>(i);
    p.v = speed;
    // Bottom straight heading +x from the origin, then a left semicircle,
    // the top straight heading -x, and a closing semicircle.
    if (s < straight) {
      p.x = s;
      p.theta = 0.0;
    } else if (s < straight + arc) {
      const double a = (s - straight) / radius;
      p.x = straight + radius * std::sin(a);
      p.y = radius - radius * std::cos(a);
      p.theta = a;
      p.omega = omega;
    } else if (s < 2.0 * straight + arc) {
      p.x = straight - (s - straight - arc);
      p.y = 2.0 * radius;
      p.theta = kPi;
    } else {
      const double a = (s - 2.0 * straight - arc) / radius;
      p.x = -radius * std::sin(a);
      p.y = radius + radius * std::cos(a);
      p.theta = kPi + a;
      p.omega = omega;
    }
    p.theta = wrap_angle(p.theta);
  }
  out.back().x = 0.0;
  out.back().y = 0.0;
  out.back().theta = 0.0;
  return out;
}

std::vector<TruthSample> stadium_of_length(double length, double radius, double speed, double rate) {
  const double straight = 0.5 * length - kPi * radius;
  if (straight < 0.0) throw DomainError("loop too short for the turn radius");
  return stadium_truth(straight, radius, speed, rate);
}

EkfNoise matched_noise(const SensorNoiseConfig& cfg) {
  EkfNoise n;
  // Per-sample white noise on the rates, expressed as the variance of the
  // increment over one odometry interval.
  const double dt = 1.0 / cfg.odom_rate;
  n.wheel_speed_std = cfg.wheel_speed_std;
  n.yaw_rate_std = cfg.yaw_rate_std;
  n.q_process = Eigen::Vector3d(1e-8, 1e-8, cfg.yaw_rate_bias * cfg.yaw_rate_bias * dt).asDiagonal();
  return n;
}

DeadReckoningResult run_dead_reckoning(std::span<const TruthSample> truth,
                                       std::span<const SensorSample> sensors,
                                       const EkfNoise& noise, double heading_var) {
  if (truth.size() != sensors.size() || truth.empty()) {
    throw DomainError("truth and sensor streams must match");
  }
  DeadReckoningResult out;
  EkfState ekf;
  ekf.mean = Eigen::Vector3d(truth.front().x, truth.front().y, truth.front().theta);
  out.estimate.push_back(ekf.mean);
  out.cov.push_back(ekf.cov);
  for (std::size_t i = 0; i + 1 < sensors.size(); ++i) {
    const SensorSample& m = sensors[i];
    if (m.heading && i > 0) ekf = ekf_update_heading(ekf, *m.heading, std::max(heading_var, 1e-12));
    ekf = ekf_predict(ekf, m.wheel_speed, m.yaw_rate, m.dt, noise);
    out.estimate.push_back(ekf.mean);
    out.cov.push_back(ekf.cov);
  }
  out.closure = loop_closure_error(out.estimate, truth);
  return out;
}

void write_ekf_csv(std::ostream& out, std::span<const TruthSample> truth,
                   const DeadReckoningResult& result) {
  if (truth.size() != result.estimate.size()) throw DomainError("truth and estimate lengths differ");
  out << "t,x_true,y_true,theta_true,x_est,y_est,theta_est,var_x,var_y,var_theta\n";
  out.precision(17);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto& p = truth[i];
    const auto& e = result.estimate[i];
    const auto& c = result.cov[i];
    out << p.t << ',' << p.x << ',' << p.y << ',' << p.theta << ',' << e[0] << ',' << e[1] << ','
        << e[2] << ',' << c(0, 0) << ',' << c(1, 1) << ',' << c(2, 2) << '\n';
  }
}

}  // namespace pathtrack
