#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <random>

#include "pathtrack/lqr.hpp"

using namespace pathtrack;

namespace {

/// Plain Riccati value iteration used as an independent oracle.
Eigen::MatrixXd value_iteration(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                const Eigen::MatrixXd& q, const Eigen::MatrixXd& r, int steps) {
  Eigen::MatrixXd p = q;
  for (int k = 0; k < steps; ++k) {
    const Eigen::MatrixXd bp = b.transpose() * p;
    p = q + a.transpose() * p * a - (bp * a).transpose() * (r + bp * b).ldlt().solve(bp * a);
  }
  return p;
}

double spectral_radius(const Eigen::MatrixXd& m) {
  return Eigen::EigenSolver<Eigen::MatrixXd>(m).eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

TEST(LateralMatrices, StructureAndHandValue) {
  VehicleParams p;
  const LateralLtiModel m = build_lateral_matrices(p, 10.0);
  EXPECT_EQ(m.a.row(0), Eigen::RowVector4d(0, 1, 0, 0));
  EXPECT_EQ(m.a.row(2), Eigen::RowVector4d(0, 0, 0, 1));
  EXPECT_NEAR(m.a(1, 1), -9.882, 5e-4);
  EXPECT_NEAR(m.b(3), p.lf * p.cf / p.iz, 1e-12);
  const LateralLtiModel m2 = build_lateral_matrices(p, 20.0);
  EXPECT_NEAR(m2.a(1, 1), 0.5 * m.a(1, 1), 1e-12);
  EXPECT_THROW(build_lateral_matrices(p, 0.1), SingularModelError);
}

TEST(Zoh, ZeroDynamicsIntegratesInput) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
  const Eigen::MatrixXd b = (Eigen::MatrixXd(2, 1) << 1.0, -2.0).finished();
  const DiscreteModel d = discretize_zoh(a, b, 0.3);
  EXPECT_TRUE(d.ad.isApprox(Eigen::MatrixXd::Identity(2, 2)));
  EXPECT_TRUE(d.bd.isApprox(b * 0.3));
}

TEST(Zoh, ScalarClosedForm) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Constant(1, 1, -1.7);
  const Eigen::MatrixXd b = Eigen::MatrixXd::Constant(1, 1, 2.0);
  const DiscreteModel d = discretize_zoh(a, b, 0.25);
  EXPECT_NEAR(d.ad(0, 0), std::exp(-1.7 * 0.25), 1e-14);
  EXPECT_NEAR(d.bd(0, 0), 2.0 * (std::exp(-1.7 * 0.25) - 1.0) / -1.7, 1e-14);
}

TEST(ZohProperty, SemigroupOnLateralModel) {
  VehicleParams p;
  const LateralLtiModel m = build_lateral_matrices(p, 8.0);
  const Eigen::MatrixXd a = m.a;
  const Eigen::MatrixXd b = m.b;
  const DiscreteModel d1 = discretize_zoh(a, b, 0.013);
  const DiscreteModel d2 = discretize_zoh(a, b, 0.029);
  const DiscreteModel d12 = discretize_zoh(a, b, 0.042);
  EXPECT_LT((d12.ad - d1.ad * d2.ad).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((d12.bd - (d2.ad * d1.bd + d2.bd)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Expm, MatchesRotation) {
  Eigen::MatrixXd m(2, 2);
  m << 0, -3.0, 3.0, 0;
  const Eigen::MatrixXd e = expm(m);
  EXPECT_NEAR(e(0, 0), std::cos(3.0), 1e-13);
  EXPECT_NEAR(e(1, 0), std::sin(3.0), 1e-13);
}

TEST(Dare, ZeroDynamics) {
  const Eigen::MatrixXd q = Eigen::MatrixXd::Identity(2, 2) * 3.0;
  const DareSolution s = solve_dare(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Ones(2, 1), q,
                                    Eigen::MatrixXd::Identity(1, 1), 100, 1e-12);
  EXPECT_TRUE(s.p.isApprox(q));
  EXPECT_EQ(s.g.norm(), 0.0);
}

TEST(Dare, GoldenRatio) {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  const DareSolution s = solve_dare(one, one, one, one, 1000, 1e-14);
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  EXPECT_NEAR(s.p(0, 0), phi, 1e-8);
  EXPECT_NEAR(s.g(0, 0), phi / (1.0 + phi), 1e-8);
}

TEST(Dare, ThrowsWithResidualWhenIterationsRunOut) {
  const Eigen::MatrixXd one = Eigen::MatrixXd::Ones(1, 1);
  try {
    solve_dare(one, one, one, one, 3, 1e-14);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(DareProperty, MatchesValueIterationOracleOnRandomSystems) {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int dim = 2 + trial % 3;
    Eigen::MatrixXd a(dim, dim), b(dim, 1), lq(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) {
        a(i, j) = 0.4 * n(rng);
        lq(i, j) = n(rng);
      }
    for (int i = 0; i < dim; ++i) b(i, 0) = n(rng);
    a /= std::max(1.0, spectral_radius(a) / 0.95);
    const Eigen::MatrixXd q = lq * lq.transpose() + 0.1 * Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::MatrixXd r = Eigen::MatrixXd::Constant(1, 1, 0.5 + trial * 0.1);
    const DareSolution s = solve_dare(a, b, q, r, 50000, 1e-12);
    const Eigen::MatrixXd oracle = value_iteration(a, b, q, r, 10000);
    EXPECT_LT((s.p - oracle).cwiseAbs().maxCoeff(), 1e-6) << "trial " << trial;
    EXPECT_LT((riccati_step(a, b, q, r, s.p) - s.p).cwiseAbs().maxCoeff(), 10 * 1e-12 * 100);
  }
}

TEST(DareProperty, GainInvariantUnderJointScaling) {
  VehicleParams p;
  const LateralLtiModel m = build_lateral_matrices(p, 10.0);
  const DiscreteModel d = discretize_zoh(m.a, m.b, 0.02);
  const Eigen::MatrixXd q = Eigen::Vector4d(1.0, 0.0, 0.5, 0.0).asDiagonal();
  const Eigen::MatrixXd r = Eigen::MatrixXd::Identity(1, 1);
  const DareSolution s1 = solve_dare(d.ad, d.bd, q, r, 50000, 1e-10);
  const DareSolution s2 = solve_dare(d.ad, d.bd, 7.0 * q, 7.0 * r, 50000, 1e-10);
  EXPECT_LT((s1.g - s2.g).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(Lqr, ClosedLoopIsStableAcrossSpeeds) {
  VehicleParams p;
  LqrConfig cfg;
  for (double v : {2.78, 5.56, 10.0, 9.72}) {
    const Eigen::RowVector4d g = lqr_gain(cfg, p, v);
    const LateralLtiModel m = build_lateral_matrices(p, v);
    const DiscreteModel d = discretize_zoh(m.a, m.b, cfg.dt);
    EXPECT_LT(spectral_radius(d.ad - d.bd * g), 1.0) << "v=" << v;
  }
}

TEST(Lqr, SteeringExamples) {
  VehicleParams p;
  const Eigen::RowVector4d g(0.1, 0.0, 1.0, 0.0);
  EXPECT_EQ(lqr_steering({}, g, 0.0, p), 0.0);
  EXPECT_NEAR(lqr_steering({}, g, 1.0 / 30.0, p), 0.07527, 1e-5);
  EXPECT_EQ(lqr_steering({}, g, 1.0 / 30.0, p, false), 0.0);
  EXPECT_NEAR(lqr_steering({0.5, 0, 0, 0}, g, 0.0, p), -0.05, 1e-15);
  EXPECT_EQ(lqr_steering({100, 0, 0, 0}, g, 0.0, p), -p.max_steer);
}
