#pragma once

#include <optional>

#include "pathtrack/course.hpp"
#include "pathtrack/longitudinal.hpp"
#include "pathtrack/vehicle.hpp"

namespace pathtrack {

enum class LookaheadLaw {
  Fixed,     // L_d = d
  SqrtGain,  // L_d = sqrt(k) v
  Linear,    // L_d = k v + d
};

struct PurePursuitConfig {
  double k = 0.35;  // [s]
  double d = 2.5;   // [m]
  LookaheadLaw law = LookaheadLaw::Linear;
  double min_lookahead = 1.0;

  /// Lookahead distance at speed v, never below min_lookahead.
  double lookahead(double v) const;
  void validate() const;
  bool operator==(const PurePursuitConfig&) const = default;
};

struct SteerCommand {
  double delta = 0.0;
  std::size_t index = 0;  // nearest segment, usable as the next search hint
};

/// delta = atan(2 L e_ld / L_d^2), clamped to max_steer.
double pure_pursuit_law(double e_ld, double lookahead, const VehicleParams& params);

/// Pure pursuit on a rear-axle or CG anchored state.
SteerCommand pure_pursuit(const SimState& state, const Course& course,
                          const PurePursuitConfig& cfg, const VehicleParams& params,
                          std::optional<std::size_t> hint = std::nullopt);

struct StanleyConfig {
  double k = 2.5;
  double v_eps = 0.1;  // [m/s]

  void validate() const;
  bool operator==(const StanleyConfig&) const = default;
};

/// delta = heading_corr + atan(k cross_corr / (v + v_eps)), clamped.
/// Both arguments are corrections: the path heading minus the vehicle
/// heading, and the lateral offset of the path from the front axle
/// (positive when the path lies to the left).
double stanley_law(double heading_corr, double cross_corr, double v, const StanleyConfig& cfg,
                   const VehicleParams& params);

SteerCommand stanley(const SimState& state, const Course& course, const StanleyConfig& cfg,
                     const VehicleParams& params, std::optional<std::size_t> hint = std::nullopt);

struct SteeringPidConfig {
  PidGains gains{0.8, 0.01, 0.02};

  bool operator==(const SteeringPidConfig&) const = default;
};

/// PID on the CG cross-track error with setpoint zero. Owns its state.
class SteeringPid {
 public:
  SteeringPid(const SteeringPidConfig& cfg, const VehicleParams& params);

  /// Positive e_cg (left of path) gives a negative (rightward) command.
  double step(double e_cg, double dt);
  const PidState& state() const noexcept { return state_; }
  void reset() { state_ = {}; }

 private:
  SteeringPidConfig cfg_;
  PidLimits limits_;
  PidState state_;
};

}  // namespace pathtrack
