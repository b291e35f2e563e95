#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "pathtrack/course.hpp"
#include "pathtrack/vehicle.hpp"

namespace pathtrack {

/// Cubic y = c0 + c1 x + c2 x^2 + c3 x^3 in the vehicle (rear axle) frame.
struct PathPoly {
  std::array<double, 4> c{0.0, 0.0, 0.0, 0.0};

  double eval(double x) const { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); }
  double slope(double x) const { return c[1] + x * (2.0 * c[2] + 3.0 * x * c[3]); }
  double curvature_term(double x) const { return 2.0 * c[2] + 6.0 * c[3] * x; }
};

struct PolyFit {
  PathPoly poly;
  double rms_residual = 0.0;
  std::size_t points = 0;
  std::size_t index = 0;  // nearest segment, usable as a search hint
};

/// Least-squares cubic through course points from `behind` metres before to
/// `window` metres after the point nearest the rear axle, expressed in the
/// vehicle frame. Throws EndOfCourse when fewer than four points remain.
PolyFit fit_path_local(const Course& course, const SimState& state, const VehicleParams& params,
                       double window = 20.0, double behind = 2.0,
                       std::optional<std::size_t> hint = std::nullopt);

struct MpcConfig {
  int horizon = 10;  // N
  double dt = 0.1;
  double w_cte = 4000.0;
  double w_psi = 1000.0;
  double w_delta = 5.0;
  double w_ddelta = 200.0;
  double bound = 0.436;
  int max_iter = 500;
  double tol = 1e-6;            // projected-gradient infinity norm, relative to max(1, J)
  double replan_period = 0.02;  // harness replanning interval [s]
  double fit_window = 20.0;

  void validate(const VehicleParams& params) const;
  bool operator==(const MpcConfig&) const = default;
};

struct MpcPrediction {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double v = 0.0;
  double cte = 0.0;
  double psi = 0.0;
};

struct MpcSolution {
  std::vector<double> deltas;               // N - 1 inputs
  std::vector<MpcPrediction> trajectory;    // N states
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> cost_history;         // cost after each accepted iterate
};

/// Fixed data of one MPC problem in the vehicle frame.
struct MpcProblem {
  MpcConfig cfg;
  PathPoly poly;
  double v = 0.0;
  double wheelbase = 0.0;
  double prev_delta = 0.0;  // input applied before the horizon
  double max_step = 0.0;    // bound on |delta_t - delta_{t-1}|, 0 = none
};

/// Euclidean projection onto |delta_t| <= bound and, when max_step > 0,
/// |delta_t - delta_{t-1}| <= max_step with delta_{-1} = prev_delta
/// (Dykstra's alternating projections). The bound holds exactly, the
/// rate bound to about 1e-6.
std::vector<double> mpc_project(const MpcProblem& problem, std::span<const double> deltas);

/// Cost of a delta sequence; fills `grad` (same length) when non-empty.
double mpc_cost(const MpcProblem& problem, std::span<const double> deltas,
                std::span<double> grad = {}, std::vector<MpcPrediction>* trajectory = nullptr);

/// Projected gradient with Barzilai-Borwein steps and Armijo backtracking.
MpcSolution mpc_solve(const MpcProblem& problem, std::span<const double> warm_start = {});

/// Convenience wrapper building the problem from a vehicle state. The
/// steering rate limit of the vehicle bounds the change per MPC step and
/// `prev_delta` should be the current steering angle.
MpcSolution mpc_solve(const MpcConfig& cfg, const SimState& state, const PathPoly& poly,
                      const VehicleParams& params, std::span<const double> warm_start = {},
                      double prev_delta = 0.0);

/// Previous solution advanced by `steps` (possibly fractional) with linear
/// interpolation, holding the last input.
std::vector<double> shift_warm_start(std::span<const double> previous, double steps);

}  // namespace pathtrack
