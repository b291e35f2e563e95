#pragma once

#include <Eigen/Core>

#include "pathtrack/common.hpp"

namespace pathtrack {

/// Throttle-to-velocity behaviour of the simulated vehicle: a first-order
/// lag from throttle to drive force followed by mass with linear drag.
struct DrivetrainParams {
  double max_drive_force = 2500.0;  // [N] at throttle 1
  double drag = 60.0;               // [N/(m/s)]
  double throttle_lag = 0.4;        // [s]

  bool operator==(const DrivetrainParams&) const = default;
};

/// Geometric, inertial and tire constants of the bicycle model.
///
/// Defaults describe a compact two-seat EV. They are plausible placeholders,
/// not measured values.
struct VehicleParams {
  double wheelbase = 2.258;     // L [m]
  double lf = 1.05;             // CG to front axle [m]
  double lr = 1.208;            // CG to rear axle [m]
  double mass = 850.0;          // [kg]
  double iz = 1100.0;           // yaw inertia [kg m^2]
  double cf = 42000.0;          // front cornering stiffness [N/rad]
  double cr = 42000.0;          // rear cornering stiffness [N/rad]
  double max_steer = 0.524;     // [rad]
  double max_steer_rate = 0.8;  // [rad/s]
  double throttle_min = -1.0;
  double throttle_max = 1.0;
  DrivetrainParams drivetrain;

  /// Throws DomainError when an invariant is violated: L = lf + lr,
  /// positive masses and stiffnesses, max_steer in (0, pi/2), and a
  /// Hurwitz lateral model over the operating speed range.
  void validate() const;

  bool operator==(const VehicleParams&) const = default;
};

/// Which point of the vehicle a pose (x, y) refers to.
enum class Anchor { RearAxle, CenterOfGravity };

struct SimState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double vx = 0.0;
  double vy = 0.0;     // dynamic model only
  double omega = 0.0;  // yaw rate, dynamic model only
  double delta = 0.0;  // actuated steering angle
  Anchor anchor = Anchor::RearAxle;
};

/// Tracking error state in the path frame, ordered (e, e_dot, theta_e, theta_e_dot).
struct PathFrameState {
  double e_cg = 0.0;
  double e_cg_dot = 0.0;
  double theta_e = 0.0;
  double theta_e_dot = 0.0;

  Eigen::Vector4d as_vector() const { return {e_cg, e_cg_dot, theta_e, theta_e_dot}; }
  static PathFrameState from_vector(const Eigen::Vector4d& v) {
    return {v[0], v[1], wrap_angle(v[2]), v[3]};
  }
};

/// Steering actuator imperfections. Zero parameters mean ideal pass-through.
struct ActuatorModel {
  double deadband = 0.0;    // [rad]
  double rate_limit = 0.0;  // [rad/s], 0 = unlimited
  double lag = 0.0;         // first-order time constant [s], 0 = none
  bool enabled = false;

  bool operator==(const ActuatorModel&) const = default;
};

enum class Integrator { Euler, Rk4 };

/// Kinematic bicycle about the rear axle. `delta_dot` is the steering rate;
/// the resulting steering angle is clamped to the vehicle limit.
SimState step_kinematic(const SimState& state, double v, double delta_dot, double dt,
                        const VehicleParams& params, Integrator method = Integrator::Rk4);

/// Linear lateral dynamics d/dt [vy, omega] = A [vy, omega] + B delta.
struct LateralDynamics {
  Eigen::Matrix2d a;
  Eigen::Vector2d b;
};
LateralDynamics lateral_dynamics(const VehicleParams& params, double vx);

/// Dynamic bicycle about the CG with linear tires. `delta` is held over the step.
SimState step_dynamic(const SimState& state, double delta, const VehicleParams& params,
                      double dt, Integrator method = Integrator::Rk4);

/// Continuous path-frame error model x' = A x + B delta + C omega_p.
struct PathFrameMatrices {
  Eigen::Matrix4d a;
  Eigen::Vector4d b;
  Eigen::Vector4d c;
};
PathFrameMatrices path_frame_matrices(const VehicleParams& params, double vx);

PathFrameState step_path_frame(const PathFrameState& state, double delta, double omega_p,
                               double vx, const VehicleParams& params, double dt);

struct SlipAngles {
  double front = 0.0;
  double rear = 0.0;
  double front_force = 0.0;  // lateral tire force, -cf * alpha_f
  double rear_force = 0.0;
};
SlipAngles slip_angles(const SimState& state, double delta, const VehicleParams& params);

/// Applies deadband, rate limit and first-order lag to a steering command.
double actuate(double cmd_delta, double prev_delta, const ActuatorModel& model, double dt);

/// Converts between plant variants. Positions are moved between rear axle and
/// CG, and the lateral velocity / yaw rate are initialised from kinematic
/// steady state when entering the dynamic model.
SimState to_dynamic(const SimState& state, const VehicleParams& params);
SimState to_kinematic(const SimState& state, const VehicleParams& params);

/// Longitudinal plant: tau F' = Fmax u - F, m v' = F - drag v. Speed never
/// goes negative (braking stops the vehicle, it does not reverse it).
struct LongitudinalState {
  double v = 0.0;
  double force = 0.0;
};
LongitudinalState step_longitudinal(const LongitudinalState& state, double throttle, double mass,
                                    const DrivetrainParams& drivetrain, double dt);

/// Throttle that holds speed `v` in steady state.
double trim_throttle(double v, const DrivetrainParams& drivetrain);

}  // namespace pathtrack
