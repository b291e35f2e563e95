#include "pathtrack/lateral.hpp"

#include <algorithm>
#include <cmath>

namespace pathtrack {

void PurePursuitConfig::validate() const {
  require_finite(k, "pure pursuit k");
  require_finite(d, "pure pursuit d");
  if (k < 0.0) throw DomainError("pure pursuit k must be non-negative");
  if (law != LookaheadLaw::SqrtGain && !(d > 0.0)) throw DomainError("pure pursuit d must be positive");
  if (law == LookaheadLaw::SqrtGain && !(k > 0.0)) throw DomainError("pure pursuit k must be positive");
  if (!(min_lookahead > 0.0)) throw DomainError("minimum lookahead must be positive");
}

double PurePursuitConfig::lookahead(double v) const {
  double ld = d;
  switch (law) {
    case LookaheadLaw::Fixed: ld = d; break;
    case LookaheadLaw::SqrtGain: ld = std::sqrt(k) * std::abs(v); break;
    case LookaheadLaw::Linear: ld = k * std::abs(v) + d; break;
  }
  return std::max(ld, min_lookahead);
}

double pure_pursuit_law(double e_ld, double lookahead, const VehicleParams& params) {
  if (!(lookahead > 0.0)) throw DomainError("lookahead must be positive");
  const double delta = std::atan(2.0 * params.wheelbase * e_ld / (lookahead * lookahead));
  return std::clamp(delta, -params.max_steer, params.max_steer);
}

SteerCommand pure_pursuit(const SimState& state, const Course& course,
                          const PurePursuitConfig& cfg, const VehicleParams& params,
                          std::optional<std::size_t> hint) {
  if (state.vx < 0.0) throw DomainError("pure pursuit needs non-negative speed");
  const double ld = cfg.lookahead(state.vx);
  const Eigen::Vector2d rear = reference_point(state, params, ReferencePoint::RearAxle);
  const LookaheadResult look = lookahead_point(course, rear, state.theta, ld, hint);
  return {pure_pursuit_law(look.e_ld, ld, params), look.index};
}

void StanleyConfig::validate() const {
  if (!(k > 0.0)) throw DomainError("stanley k must be positive");
  if (!(v_eps >= 0.0)) throw DomainError("stanley v_eps must be non-negative");
}

double stanley_law(double heading_corr, double cross_corr, double v, const StanleyConfig& cfg,
                   const VehicleParams& params) {
  const double denom = v + cfg.v_eps;
  double cross = 0.0;
  if (cross_corr != 0.0) {
    cross = denom > 0.0 ? std::atan(cfg.k * cross_corr / denom) : std::copysign(kPi / 2, cross_corr);
  }
  return std::clamp(wrap_angle(heading_corr) + cross, -params.max_steer, params.max_steer);
}

SteerCommand stanley(const SimState& state, const Course& course, const StanleyConfig& cfg,
                     const VehicleParams& params, std::optional<std::size_t> hint) {
  const TrackingError err = tracking_errors(course, state, params, ReferencePoint::FrontAxle, hint);
  return {stanley_law(-err.theta_e, -err.e, state.vx, cfg, params), err.index};
}

SteeringPid::SteeringPid(const SteeringPidConfig& cfg, const VehicleParams& params) : cfg_(cfg) {
  limits_.out_min = -params.max_steer;
  limits_.out_max = params.max_steer;
}

double SteeringPid::step(double e_cg, double dt) {
  const PidOutput out = pid_step(cfg_.gains, state_, limits_, 0.0, e_cg, dt);
  state_ = out.state;
  return out.u;
}

}  // namespace pathtrack
