#pragma once

#include <limits>

namespace pathtrack {

struct PidGains {
  double kp = 0.0;
  double ki = 0.0;  // multiplies the running error sum (per sample, not per second)
  double kd = 0.0;

  bool operator==(const PidGains&) const = default;
};

struct PidLimits {
  double out_min = -1.0;
  double out_max = 1.0;
  double integral_min = -std::numeric_limits<double>::infinity();
  double integral_max = std::numeric_limits<double>::infinity();

  bool operator==(const PidLimits&) const = default;
};

struct PidState {
  double integral = 0.0;  // sum of errors
  double prev_error = 0.0;
  double time = 0.0;
  bool has_prev = false;
};

struct PidOutput {
  double u = 0.0;
  PidState state;
};

/// Discrete PID: u = kp e + ki sum(e) + kd (e - e_prev) / dt. The output is
/// clamped to the limits and the integral is frozen while the output is
/// saturated in the direction of the error. The derivative is zero on the
/// first call.
PidOutput pid_step(const PidGains& gains, const PidState& state, const PidLimits& limits,
                   double setpoint, double measured, double dt);

/// Modified MIT-rule self-tuning PID.
struct AdaptivePidConfig {
  PidGains initial;
  double gamma_p = 0.1;
  double gamma_i = 0.002;  // per sample, like ki
  double gamma_d = 0.1;
  double filter_tc = 0.5;  // low-pass time constant for e_m [s]
  PidGains min_gains{0.0, 0.0, 0.0};
  PidGains max_gains;  // defaults to 10x initial when left at zero

  /// Bounds with the default upper bound filled in.
  PidGains upper_bounds() const;
  bool operator==(const AdaptivePidConfig&) const = default;
};

struct AdaptivePidState {
  PidGains gains;
  double e_m = 0.0;    // low-passed error
  double d = 0.0;      // raw error derivative
  double d_m = 0.0;    // derivative of the filtered error
  double prev_error = 0.0;
  double prev_e_m = 0.0;
  bool has_prev = false;
};

AdaptivePidState make_adaptive_state(const AdaptivePidConfig& cfg);

struct AdaptivePidOutput {
  double u = 0.0;
  AdaptivePidState adaptive;
  PidState pid;
};

/// Updates the filtered error and derivatives, adapts the gains
///   kp += gp |e - e_m|,  ki += gi e_m,  kd += gd |D - D_m|,
/// clamps them, then runs pid_step with the new gains.
AdaptivePidOutput adaptive_pid_step(const AdaptivePidConfig& cfg, const AdaptivePidState& state,
                                    const PidState& pid_state, const PidLimits& limits,
                                    double setpoint, double measured, double dt);

}  // namespace pathtrack
