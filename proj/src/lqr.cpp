#include "pathtrack/lqr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

namespace pathtrack {

LateralLtiModel build_lateral_matrices(const VehicleParams& params, double vx) {
  const PathFrameMatrices m = path_frame_matrices(params, vx);
  return {m.a, m.b, m.c, vx};
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DomainError("expm needs a square matrix");
  if (!m.allFinite()) throw DomainError("expm input is not finite");
  const double norm = m.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXd a = m / std::ldexp(1.0, squarings);

  const auto n = m.rows();
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int k = 1; k <= 30; ++k) {
    term = term * a / static_cast<double>(k);
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18 * result.cwiseAbs().maxCoeff()) break;
  }
  for (int i = 0; i < squarings; ++i) result = result * result;
  return result;
}

DiscreteModel discretize_zoh(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt) {
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  if (a.rows() != a.cols() || b.rows() != a.rows()) throw DomainError("A/B shape mismatch");
  const auto n = a.rows();
  const auto m = b.cols();
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a * dt;
  aug.topRightCorner(n, m) = b * dt;
  const Eigen::MatrixXd e = expm(aug);
  return {e.topLeftCorner(n, n), e.topRightCorner(n, m)};
}

namespace {

Eigen::MatrixXd gain_for(const Eigen::MatrixXd& ad, const Eigen::MatrixXd& bd,
                         const Eigen::MatrixXd& r, const Eigen::MatrixXd& p) {
  const Eigen::MatrixXd s = r + bd.transpose() * p * bd;
  return s.partialPivLu().solve(bd.transpose() * p * ad);
}

}  // namespace

Eigen::MatrixXd riccati_step(const Eigen::MatrixXd& ad, const Eigen::MatrixXd& bd,
                             const Eigen::MatrixXd& q, const Eigen::MatrixXd& r,
                             const Eigen::MatrixXd& p) {
  const Eigen::MatrixXd g = gain_for(ad, bd, r, p);
  Eigen::MatrixXd next = q + ad.transpose() * p * ad - ad.transpose() * p * bd * g;
  return 0.5 * (next + next.transpose());
}

DareSolution solve_dare(const Eigen::MatrixXd& ad, const Eigen::MatrixXd& bd,
                        const Eigen::MatrixXd& q, const Eigen::MatrixXd& r, int max_iter,
                        double tol) {
  const auto n = ad.rows();
  if (ad.cols() != n || bd.rows() != n || q.rows() != n || q.cols() != n ||
      r.rows() != bd.cols() || r.cols() != bd.cols()) {
    throw DomainError("DARE matrix shapes are inconsistent");
  }
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 ||
      (r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw DomainError("Q and R must be symmetric");
  }
  if (r.llt().info() != Eigen::Success) throw DomainError("R must be positive definite");

  DareSolution sol;
  sol.p = q;
  sol.residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= max_iter; ++it) {
    const Eigen::MatrixXd next = riccati_step(ad, bd, q, r, sol.p);
    if (!next.allFinite()) throw ConvergenceError("DARE iteration diverged", sol.residual);
    sol.residual = (next - sol.p).cwiseAbs().maxCoeff();
    sol.p = next;
    sol.iterations = it;
    if (sol.residual < tol) {
      sol.g = gain_for(ad, bd, r, sol.p);
      return sol;
    }
  }
  throw ConvergenceError("DARE did not converge in " + std::to_string(max_iter) + " iterations",
                         sol.residual);
}

void LqrConfig::validate() const {
  for (double v : {q1, q2, q3, q4}) {
    if (!(v >= 0.0)) throw DomainError("LQR state weights must be non-negative");
  }
  if (!(qu > 0.0)) throw DomainError("LQR input weight must be positive");
  if (!(dt > 0.0)) throw DomainError("LQR dt must be positive");
  if (max_iter < 1) throw DomainError("LQR max_iter must be positive");
  if (!(tol > 0.0)) throw DomainError("LQR tol must be positive");
}

Eigen::RowVector4d lqr_gain(const LqrConfig& cfg, const VehicleParams& params, double vx) {
  cfg.validate();
  const LateralLtiModel model = build_lateral_matrices(params, vx);
  const DiscreteModel d = discretize_zoh(model.a, model.b, cfg.dt);
  const Eigen::Matrix4d q = Eigen::Vector4d(cfg.q1, cfg.q2, cfg.q3, cfg.q4).asDiagonal();
  const Eigen::MatrixXd r = Eigen::MatrixXd::Constant(1, 1, cfg.qu);
  const DareSolution sol = solve_dare(d.ad, d.bd, q, r, cfg.max_iter, cfg.tol);
  return sol.g.row(0);
}

double lqr_steering(const PathFrameState& x, const Eigen::RowVector4d& g, double kappa,
                    const VehicleParams& params, bool feedforward) {
  double delta = -g.dot(x.as_vector().transpose());
  if (feedforward) delta += params.wheelbase * kappa;
  return std::clamp(delta, -params.max_steer, params.max_steer);
}

}  // namespace pathtrack
