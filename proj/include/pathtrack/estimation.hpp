#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace pathtrack {

/// Ground-truth rear-axle motion sample.
struct TruthSample {
  double t = 0.0;
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double omega = 0.0;
};

struct SensorNoiseConfig {
  double wheel_speed_std = 0.02;   // [m/s]
  double wheel_scale_error = 0.0;  // relative wheel radius error
  double yaw_rate_std = 0.005;     // [rad/s]
  double yaw_rate_bias = 0.003;    // [rad/s], not estimated by the filter
  double heading_std = 0.03;       // [rad]
  double odom_rate = 100.0;        // [Hz]
  double heading_rate = 10.0;      // [Hz]
  std::uint64_t seed = 1;

  void validate() const;
};

struct SensorSample {
  double t = 0.0;
  double dt = 0.0;  // interval to the next sample
  double wheel_speed = 0.0;
  double yaw_rate = 0.0;
  std::optional<double> heading;
};

/// One sensor sample per truth sample; the yaw rate is the mean rate over
/// the interval to the next sample. Heading pseudo-measurements every
/// 1 / heading_rate seconds. Deterministic per seed.
std::vector<SensorSample> simulate_sensors(std::span<const TruthSample> truth,
                                           const SensorNoiseConfig& cfg);

struct EkfState {
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
};

struct EkfNoise {
  Eigen::Matrix3d q_process = Eigen::Matrix3d::Zero();  // additive, per second
  double wheel_speed_std = 0.0;  // propagated through the motion model
  double yaw_rate_std = 0.0;
};

EkfState ekf_predict(const EkfState& ekf, double wheel_speed, double yaw_rate, double dt,
                     const EkfNoise& noise);

EkfState ekf_update_heading(const EkfState& ekf, double heading, double r_meas);

struct LoopClosure {
  double closure = 0.0;
  double length = 0.0;
  double ratio = 0.0;
};

/// Distance between estimated start and end positions against the truth
/// path length. The truth must start and end at the same position.
LoopClosure loop_closure_error(std::span<const Eigen::Vector3d> estimated,
                               std::span<const TruthSample> truth);

/// Counter-clockwise stadium: two straights joined by semicircles, sampled
/// at `rate` Hz at constant speed so that the last sample closes the loop.
std::vector<TruthSample> stadium_truth(double straight, double radius, double speed, double rate);

/// Stadium whose straights are sized for a total length of `length`.
std::vector<TruthSample> stadium_of_length(double length, double radius, double speed, double rate);

struct DeadReckoningResult {
  std::vector<Eigen::Vector3d> estimate;
  std::vector<Eigen::Matrix3d> cov;
  LoopClosure closure;
};

/// Runs the EKF over a sensor stream starting from the first truth pose.
DeadReckoningResult run_dead_reckoning(std::span<const TruthSample> truth,
                                       std::span<const SensorSample> sensors,
                                       const EkfNoise& noise, double heading_var);

/// EKF noise matched to a sensor configuration.
EkfNoise matched_noise(const SensorNoiseConfig& cfg);

/// Estimated against true trajectory, header
/// t,x_true,y_true,theta_true,x_est,y_est,theta_est,var_x,var_y,var_theta.
void write_ekf_csv(std::ostream& out, std::span<const TruthSample> truth,
                   const DeadReckoningResult& result);

}  // namespace pathtrack
