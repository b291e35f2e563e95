#include "pathtrack/vehicle.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>

namespace pathtrack {

void VehicleParams::validate() const {
  for (double v : {wheelbase, lf, lr, mass, iz, cf, cr, max_steer, max_steer_rate,
                   throttle_min, throttle_max, drivetrain.max_drive_force, drivetrain.drag,
                   drivetrain.throttle_lag}) {
    require_finite(v, "vehicle parameter");
  }
  if (std::abs(wheelbase - (lf + lr)) > 1e-9) {
    throw DomainError("wheelbase must equal lf + lr");
  }
  if (wheelbase <= 0 || lf <= 0 || lr <= 0 || mass <= 0 || iz <= 0 || cf <= 0 || cr <= 0) {
    throw DomainError("geometric, inertial and tire parameters must be positive");
  }
  if (max_steer <= 0 || max_steer >= kPi / 2) throw DomainError("max_steer must be in (0, pi/2)");
  if (max_steer_rate <= 0) throw DomainError("max_steer_rate must be positive");
  if (throttle_min >= throttle_max) throw DomainError("empty throttle range");
  if (drivetrain.max_drive_force <= 0 || drivetrain.drag < 0 || drivetrain.throttle_lag <= 0) {
    throw DomainError("invalid drivetrain parameters");
  }
  // The linear lateral model must be stable wherever the harness may use it.
  for (double v = kMinDynamicSpeed + 0.01; v <= 40.0; v += 0.5) {
    const Eigen::Matrix2d a = lateral_dynamics(*this, v).a;
    if (a.trace() >= 0.0 || a.determinant() <= 0.0) {
      throw DomainError("lateral dynamics are not Hurwitz at vx = " + std::to_string(v));
    }
  }
}

namespace {

void check_state(const SimState& s) {
  for (double v : {s.x, s.y, s.theta, s.vx, s.vy, s.omega, s.delta}) require_finite(v, "state");
}

template <typename Vec, typename F>
Vec integrate(const Vec& x, double dt, Integrator method, F&& f) {
  if (method == Integrator::Euler) return x + dt * f(x);
  const Vec k1 = f(x);
  const Vec k2 = f(Vec(x + 0.5 * dt * k1));
  const Vec k3 = f(Vec(x + 0.5 * dt * k2));
  const Vec k4 = f(Vec(x + dt * k3));
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void require_dynamic_speed(double vx) {
  if (!(vx > kMinDynamicSpeed)) {
    throw SingularModelError("dynamic model requires vx > " + std::to_string(kMinDynamicSpeed) +
                             " m/s, got " + std::to_string(vx));
  }
}

}  // namespace

SimState step_kinematic(const SimState& state, double v, double delta_dot, double dt,
                        const VehicleParams& params, Integrator method) {
  check_state(state);
  require_finite(v, "speed");
  require_finite(delta_dot, "steering rate");
  require_finite(dt, "dt");
  if (dt <= 0) throw DomainError("dt must be positive");
  if (std::abs(state.delta) > params.max_steer + 1e-12) {
    throw DomainError("steering angle exceeds max_steer");
  }
  if (state.anchor != Anchor::RearAxle) throw DomainError("kinematic model expects a rear-axle pose");

  using Vec4 = Eigen::Vector4d;  // x, y, theta, delta
  const double inv_l = 1.0 / params.wheelbase;
  auto f = [&](const Vec4& s) {
    return Vec4(v * std::cos(s[2]), v * std::sin(s[2]), v * std::tan(s[3]) * inv_l, delta_dot);
  };
  const Vec4 next = integrate(Vec4(state.x, state.y, state.theta, state.delta), dt, method, f);

  SimState out = state;
  out.x = next[0];
  out.y = next[1];
  out.theta = wrap_angle(next[2]);
  out.delta = std::clamp(next[3], -params.max_steer, params.max_steer);
  out.vx = v;
  out.vy = 0.0;
  out.omega = v * std::tan(out.delta) * inv_l;
  return out;
}

LateralDynamics lateral_dynamics(const VehicleParams& p, double vx) {
  require_dynamic_speed(vx);
  const double m = p.mass;
  LateralDynamics d;
  d.a << -(p.cf + p.cr) / (m * vx), (p.lr * p.cr - p.lf * p.cf) / (m * vx) - vx,
      (p.lr * p.cr - p.lf * p.cf) / (p.iz * vx),
      -(p.lf * p.lf * p.cf + p.lr * p.lr * p.cr) / (p.iz * vx);
  d.b << p.cf / m, p.lf * p.cf / p.iz;
  return d;
}

SimState step_dynamic(const SimState& state, double delta, const VehicleParams& params,
                      double dt, Integrator method) {
  check_state(state);
  require_finite(delta, "steering angle");
  require_finite(dt, "dt");
  if (dt <= 0) throw DomainError("dt must be positive");
  if (state.anchor != Anchor::CenterOfGravity) throw DomainError("dynamic model expects a CG pose");
  require_dynamic_speed(state.vx);

  const double steer = std::clamp(delta, -params.max_steer, params.max_steer);
  const LateralDynamics lat = lateral_dynamics(params, state.vx);
  const double vx = state.vx;

  using Vec5 = Eigen::Matrix<double, 5, 1>;  // vy, omega, x, y, theta
  auto f = [&](const Vec5& s) {
    const Eigen::Vector2d w = lat.a * s.head<2>() + lat.b * steer;
    const double c = std::cos(s[4]);
    const double sn = std::sin(s[4]);
    Vec5 d;
    d << w[0], w[1], vx * c - s[0] * sn, vx * sn + s[0] * c, s[1];
    return d;
  };
  Vec5 x0;
  x0 << state.vy, state.omega, state.x, state.y, state.theta;
  const Vec5 next = integrate(x0, dt, method, f);

  SimState out = state;
  out.vy = next[0];
  out.omega = next[1];
  out.x = next[2];
  out.y = next[3];
  out.theta = wrap_angle(next[4]);
  out.delta = steer;
  return out;
}

PathFrameMatrices path_frame_matrices(const VehicleParams& p, double vx) {
  require_dynamic_speed(vx);
  const double m = p.mass;
  const double sum_c = p.cf + p.cr;
  const double diff_c = p.lr * p.cr - p.lf * p.cf;
  const double sq_c = p.lf * p.lf * p.cf + p.lr * p.lr * p.cr;
  PathFrameMatrices out;
  out.a << 0, 1, 0, 0,
      0, -sum_c / (m * vx), sum_c / m, diff_c / (m * vx),
      0, 0, 0, 1,
      0, diff_c / (p.iz * vx), -diff_c / p.iz, -sq_c / (p.iz * vx);
  out.b << 0, p.cf / m, 0, p.lf * p.cf / p.iz;
  out.c << 0, diff_c / (m * vx) - vx, 0, -sq_c / (p.iz * vx);
  return out;
}

PathFrameState step_path_frame(const PathFrameState& state, double delta, double omega_p,
                               double vx, const VehicleParams& params, double dt) {
  for (double v : {state.e_cg, state.e_cg_dot, state.theta_e, state.theta_e_dot, delta, omega_p,
                   vx, dt}) {
    require_finite(v, "path-frame input");
  }
  if (dt <= 0) throw DomainError("dt must be positive");
  const PathFrameMatrices m = path_frame_matrices(params, vx);
  const Eigen::Vector4d forcing = m.b * delta + m.c * omega_p;
  auto f = [&](const Eigen::Vector4d& x) -> Eigen::Vector4d { return m.a * x + forcing; };
  return PathFrameState::from_vector(integrate(state.as_vector(), dt, Integrator::Rk4, f));
}

SlipAngles slip_angles(const SimState& state, double delta, const VehicleParams& params) {
  require_dynamic_speed(state.vx);
  SlipAngles s;
  s.rear = std::atan((state.vy - params.lr * state.omega) / state.vx);
  s.front = std::atan((state.vy + params.lf * state.omega) / state.vx) - delta;
  s.front_force = -params.cf * s.front;
  s.rear_force = -params.cr * s.rear;
  return s;
}

double actuate(double cmd_delta, double prev_delta, const ActuatorModel& model, double dt) {
  if (!model.enabled) return cmd_delta;
  double target = cmd_delta;
  if (std::abs(cmd_delta - prev_delta) < model.deadband) target = prev_delta;
  if (model.rate_limit > 0.0) {
    const double max_step = model.rate_limit * dt;
    target = prev_delta + std::clamp(target - prev_delta, -max_step, max_step);
  }
  if (model.lag > 0.0) {
    target = prev_delta + (target - prev_delta) * (1.0 - std::exp(-dt / model.lag));
  }
  return target;
}

SimState to_dynamic(const SimState& state, const VehicleParams& params) {
  if (state.anchor == Anchor::CenterOfGravity) return state;
  SimState out = state;
  out.x = state.x + params.lr * std::cos(state.theta);
  out.y = state.y + params.lr * std::sin(state.theta);
  out.omega = state.vx * std::tan(state.delta) / params.wheelbase;
  out.vy = params.lr * out.omega;
  out.anchor = Anchor::CenterOfGravity;
  return out;
}

SimState to_kinematic(const SimState& state, const VehicleParams& params) {
  if (state.anchor == Anchor::RearAxle) return state;
  SimState out = state;
  out.x = state.x - params.lr * std::cos(state.theta);
  out.y = state.y - params.lr * std::sin(state.theta);
  out.vy = 0.0;
  out.omega = state.vx * std::tan(state.delta) / params.wheelbase;
  out.anchor = Anchor::RearAxle;
  return out;
}

LongitudinalState step_longitudinal(const LongitudinalState& state, double throttle, double mass,
                                    const DrivetrainParams& dt_params, double dt) {
  require_finite(throttle, "throttle");
  if (dt <= 0) throw DomainError("dt must be positive");
  auto f = [&](const Eigen::Vector2d& s) {
    return Eigen::Vector2d((s[1] - dt_params.drag * s[0]) / mass,
                           (dt_params.max_drive_force * throttle - s[1]) / dt_params.throttle_lag);
  };
  const Eigen::Vector2d next =
      integrate(Eigen::Vector2d(state.v, state.force), dt, Integrator::Rk4, f);
  return {std::max(next[0], 0.0), next[1]};
}

double trim_throttle(double v, const DrivetrainParams& drivetrain) {
  return drivetrain.drag * v / drivetrain.max_drive_force;
}

}  // namespace pathtrack
