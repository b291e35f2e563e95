#include "pathtrack/longitudinal.hpp"

#include <algorithm>
#include <cmath>

#include "pathtrack/common.hpp"

namespace pathtrack {

PidOutput pid_step(const PidGains& gains, const PidState& state, const PidLimits& limits,
                   double setpoint, double measured, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const double e = setpoint - measured;
  const double derivative = state.has_prev ? (e - state.prev_error) / dt : 0.0;

  const double candidate = std::clamp(state.integral + e, limits.integral_min, limits.integral_max);
  const double raw = gains.kp * e + gains.ki * candidate + gains.kd * derivative;

  PidOutput out;
  out.state = state;
  out.state.integral = candidate;
  const bool saturated_high = raw > limits.out_max && e > 0.0;
  const bool saturated_low = raw < limits.out_min && e < 0.0;
  double u = raw;
  if (saturated_high || saturated_low) {
    out.state.integral = state.integral;
    u = gains.kp * e + gains.ki * state.integral + gains.kd * derivative;
  }
  out.u = std::clamp(u, limits.out_min, limits.out_max);
  out.state.prev_error = e;
  out.state.time = state.time + dt;
  out.state.has_prev = true;
  return out;
}

PidGains AdaptivePidConfig::upper_bounds() const {
  if (max_gains == PidGains{}) return {10.0 * initial.kp, 10.0 * initial.ki, 10.0 * initial.kd};
  return max_gains;
}

AdaptivePidState make_adaptive_state(const AdaptivePidConfig& cfg) {
  AdaptivePidState s;
  s.gains = cfg.initial;
  return s;
}

AdaptivePidOutput adaptive_pid_step(const AdaptivePidConfig& cfg, const AdaptivePidState& state,
                                    const PidState& pid_state, const PidLimits& limits,
                                    double setpoint, double measured, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (!(cfg.filter_tc > 0.0)) throw DomainError("filter time constant must be positive");

  AdaptivePidState next = state;
  const double e = setpoint - measured;
  const double alpha = dt / (cfg.filter_tc + dt);
  next.e_m = state.e_m + alpha * (e - state.e_m);
  next.d = state.has_prev ? (e - state.prev_error) / dt : 0.0;
  next.d_m = state.has_prev ? (next.e_m - state.prev_e_m) / dt : 0.0;
  next.prev_error = e;
  next.prev_e_m = next.e_m;
  next.has_prev = true;

  const PidGains hi = cfg.upper_bounds();
  const PidGains& lo = cfg.min_gains;
  next.gains.kp = std::clamp(state.gains.kp + cfg.gamma_p * std::abs(e - next.e_m), lo.kp, hi.kp);
  next.gains.ki = std::clamp(state.gains.ki + cfg.gamma_i * next.e_m, lo.ki, hi.ki);
  next.gains.kd = std::clamp(state.gains.kd + cfg.gamma_d * std::abs(next.d - next.d_m), lo.kd, hi.kd);

  const PidOutput pid = pid_step(next.gains, pid_state, limits, setpoint, measured, dt);
  return {pid.u, next, pid.state};
}

}  // namespace pathtrack
