#pragma once

#include <Eigen/Core>

#include "pathtrack/vehicle.hpp"

namespace pathtrack {

/// Path-frame error model about a constant forward speed.
struct LateralLtiModel {
  Eigen::Matrix4d a;
  Eigen::Vector4d b;
  Eigen::Vector4d c;  // multiplies the path yaw rate omega_p
  double vx = 0.0;
};

LateralLtiModel build_lateral_matrices(const VehicleParams& params, double vx);

/// Matrix exponential by scaling and squaring of a truncated Taylor series.
Eigen::MatrixXd expm(const Eigen::MatrixXd& m);

struct DiscreteModel {
  Eigen::MatrixXd ad;
  Eigen::MatrixXd bd;
};

/// Zero-order-hold discretisation via the exponential of [[A, B], [0, 0]] dt.
DiscreteModel discretize_zoh(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt);

struct DareSolution {
  Eigen::MatrixXd p;
  Eigen::MatrixXd g;
  int iterations = 0;
  double residual = 0.0;  // last max-abs change of P
};

/// Riccati value iteration from P = Q until the max-abs update is below tol.
/// Throws ConvergenceError carrying the last residual.
DareSolution solve_dare(const Eigen::MatrixXd& ad, const Eigen::MatrixXd& bd,
                        const Eigen::MatrixXd& q, const Eigen::MatrixXd& r, int max_iter,
                        double tol);

/// Right-hand side of the Riccati recursion, exposed for checks.
Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& ad, const Eigen::MatrixXd& bd,
                             const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                             const Eigen::MatrixXd& p);

struct LqrConfig {
  double q1 = 0.01;
  double q2 = 0.0;
  double q3 = 0.0;
  double q4 = 0.0;
  double qu = 1.0;
  double dt = 0.02;
  int max_iter = 50000;
  double tol = 1e-8;
  bool feedforward = true;

  void validate() const;
  bool operator==(const LqrConfig&) const = default;
};

/// Discretises the path-frame model at vx and solves the DARE.
/// Returns the 1x4 state feedback gain.
Eigen::RowVector4d lqr_gain(const LqrConfig& cfg, const VehicleParams& params, double vx);

/// delta = -G x + L kappa (the second term only with feedforward), clamped.
double lqr_steering(const PathFrameState& x, const Eigen::RowVector4d& g, double kappa,
                    const VehicleParams& params, bool feedforward = true);

}  // namespace pathtrack
