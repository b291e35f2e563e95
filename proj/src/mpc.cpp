#include "pathtrack/mpc.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <limits>

namespace pathtrack {

PolyFit fit_path_local(const Course& course, const SimState& state, const VehicleParams& params,
                       double window, double behind, std::optional<std::size_t> hint) {
  if (!(window > 0.0) || !(behind >= 0.0)) throw DomainError("fit window must be positive");
  const Eigen::Vector2d rear = reference_point(state, params, ReferencePoint::RearAxle);
  const NearestResult near = nearest_point(course, rear, hint);
  const std::size_t n = course.size();
  const double s0 = near.point.s;
  const double len = course.length();

  auto ahead_of_near = [&](std::size_t i) {
    double ds = course[i].s - s0;
    if (course.closed()) {
      if (ds < -0.5 * len) ds += len;
      if (ds > 0.5 * len) ds -= len;
    }
    return ds;
  };

  std::vector<std::size_t> idx;
  const std::size_t start = near.index;
  // Walk backwards, then forwards, from the nearest segment.
  for (std::size_t k = 0; k < n; ++k) {
    if (!course.closed() && k > start) break;
    const std::size_t i = (start + n - k) % n;
    if (ahead_of_near(i) < -behind) break;
    idx.push_back(i);
  }
  std::reverse(idx.begin(), idx.end());
  for (std::size_t k = 1; k < n && idx.size() < n; ++k) {
    if (!course.closed() && start + k >= n) break;
    const std::size_t i = (start + k) % n;
    if (ahead_of_near(i) > window) break;
    idx.push_back(i);
  }
  if (idx.size() < 4) throw EndOfCourse("not enough path points ahead for the local fit");

  const double c = std::cos(state.theta);
  const double s = std::sin(state.theta);
  const auto m = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXd vander(m, 4);
  Eigen::VectorXd ys(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const PathPoint& p = course[idx[static_cast<std::size_t>(r)]];
    const double dx = p.x - rear.x();
    const double dy = p.y - rear.y();
    const double xv = c * dx + s * dy;
    ys[r] = -s * dx + c * dy;
    vander(r, 0) = 1.0;
    vander(r, 1) = xv;
    vander(r, 2) = xv * xv;
    vander(r, 3) = xv * xv * xv;
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(vander);
  if (qr.rank() < 4) throw EndOfCourse("degenerate path window for the local fit");
  const Eigen::Vector4d coef = qr.solve(ys);

  PolyFit out;
  for (int i = 0; i < 4; ++i) out.poly.c[static_cast<std::size_t>(i)] = coef[i];
  out.rms_residual = std::sqrt((vander * coef - ys).squaredNorm() / static_cast<double>(m));
  out.points = idx.size();
  out.index = near.index;
  return out;
}

void MpcConfig::validate(const VehicleParams& params) const {
  if (horizon < 2) throw DomainError("MPC horizon must be at least 2");
  if (!(dt > 0.0)) throw DomainError("MPC dt must be positive");
  for (double w : {w_cte, w_psi, w_delta, w_ddelta}) {
    if (!(w >= 0.0)) throw DomainError("MPC weights must be non-negative");
  }
  if (!(bound > 0.0) || bound > params.max_steer + 1e-12) {
    throw DomainError("MPC steering bound must be in (0, max_steer]");
  }
  if (max_iter < 1 || !(tol > 0.0)) throw DomainError("invalid MPC solver settings");
  if (!(replan_period > 0.0) || !(fit_window > 0.0)) throw DomainError("invalid MPC timing");
}

double mpc_cost(const MpcProblem& pb, std::span<const double> deltas, std::span<double> grad,
                std::vector<MpcPrediction>* trajectory) {
  const MpcConfig& cfg = pb.cfg;
  const auto n = static_cast<std::size_t>(cfg.horizon);
  if (deltas.size() != n - 1) throw DomainError("MPC input sequence must have N - 1 entries");
  if (!grad.empty() && grad.size() != n - 1) throw DomainError("gradient buffer has wrong size");
  const PathPoly& f = pb.poly;
  const double v = pb.v;
  const double dt = cfg.dt;
  const double turn = v / pb.wheelbase * dt;

  std::vector<MpcPrediction> st(n);
  st[0].v = v;
  st[0].cte = -f.eval(0.0);
  st[0].psi = -std::atan(f.slope(0.0));
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const MpcPrediction& a = st[t];
    MpcPrediction& b = st[t + 1];
    b.x = a.x + v * std::cos(a.theta) * dt;
    b.y = a.y + v * std::sin(a.theta) * dt;
    b.theta = a.theta + turn * deltas[t];
    b.v = v;
    b.cte = a.y - f.eval(a.x) + v * std::sin(a.psi) * dt;
    b.psi = a.theta - std::atan(f.slope(a.x)) + turn * deltas[t];
  }

  double cost = 0.0;
  for (const auto& s : st) cost += cfg.w_cte * s.cte * s.cte + cfg.w_psi * s.psi * s.psi;
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const double prev = t == 0 ? pb.prev_delta : deltas[t - 1];
    const double dd = deltas[t] - prev;
    cost += cfg.w_delta * deltas[t] * deltas[t] + cfg.w_ddelta * dd * dd;
  }

  if (!grad.empty()) {
    // Adjoints of (x, y, theta, cte, psi) at the current step.
    double lx = 0.0, ly = 0.0, lth = 0.0;
    double lcte = 2.0 * cfg.w_cte * st[n - 1].cte;
    double lpsi = 2.0 * cfg.w_psi * st[n - 1].psi;
    for (std::size_t t = n - 1; t-- > 0;) {
      const MpcPrediction& a = st[t];
      grad[t] = (lth + lpsi) * turn;
      const double fp = f.slope(a.x);
      const double dpsi_dx = -f.curvature_term(a.x) / (1.0 + fp * fp);
      const double nx = lx - lcte * fp + lpsi * dpsi_dx;
      const double ny = ly + lcte;
      const double nth = lx * (-v * std::sin(a.theta) * dt) + ly * (v * std::cos(a.theta) * dt) +
                         lth + lpsi;
      const double ncte = 2.0 * cfg.w_cte * a.cte;
      const double npsi = lcte * v * std::cos(a.psi) * dt + 2.0 * cfg.w_psi * a.psi;
      lx = nx;
      ly = ny;
      lth = nth;
      lcte = ncte;
      lpsi = npsi;
    }
    for (std::size_t t = 0; t + 1 < n; ++t) {
      const double prev = t == 0 ? pb.prev_delta : deltas[t - 1];
      grad[t] += 2.0 * cfg.w_delta * deltas[t] + 2.0 * cfg.w_ddelta * (deltas[t] - prev);
      if (t + 2 < n) grad[t] -= 2.0 * cfg.w_ddelta * (deltas[t + 1] - deltas[t]);
    }
  }
  if (trajectory) *trajectory = std::move(st);
  return cost;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

std::vector<double> mpc_project(const MpcProblem& pb, std::span<const double> deltas) {
  const double b = pb.cfg.bound;
  const double c = pb.max_step;
  const std::size_t m = deltas.size();
  auto box = [&](std::vector<double>& v) {
    for (double& d : v) d = std::clamp(d, -b, b);
  };
  std::vector<double> x(deltas.begin(), deltas.end());
  if (!(c > 0.0) || m == 0) {
    box(x);
    return x;
  }
  // Pairwise projection onto |v[i] - v[i-1]| <= c for i of one parity.
  auto rate = [&](std::vector<double>& v, std::size_t parity) {
    for (std::size_t i = parity; i < m; i += 2) {
      if (i == 0) {
        v[0] = std::clamp(v[0], pb.prev_delta - c, pb.prev_delta + c);
        continue;
      }
      const double excess = v[i] - v[i - 1];
      if (std::abs(excess) <= c) continue;
      const double shift = 0.5 * (excess - std::copysign(c, excess));
      v[i] -= shift;
      v[i - 1] += shift;
    }
  };
  std::vector<double> p(m, 0.0), q(m, 0.0), r(m, 0.0), y(m), w(m), z(m);
  for (int it = 0; it < 5000; ++it) {
    for (std::size_t i = 0; i < m; ++i) y[i] = x[i] + p[i];
    box(y);
    for (std::size_t i = 0; i < m; ++i) p[i] += x[i] - y[i];
    for (std::size_t i = 0; i < m; ++i) w[i] = y[i] + q[i];
    rate(w, 0);
    for (std::size_t i = 0; i < m; ++i) q[i] += y[i] - w[i];
    for (std::size_t i = 0; i < m; ++i) z[i] = w[i] + r[i];
    rate(z, 1);
    for (std::size_t i = 0; i < m; ++i) r[i] += w[i] - z[i];
    double change = 0.0;
    for (std::size_t i = 0; i < m; ++i) change = std::max(change, std::abs(z[i] - x[i]));
    x.swap(z);
    double violation = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double prev = i == 0 ? pb.prev_delta : x[i - 1];
      violation = std::max({violation, std::abs(x[i]) - b, std::abs(x[i] - prev) - c});
    }
    if (change < 1e-13 && violation < 1e-10) break;
  }
  box(x);
  return x;
}

MpcSolution mpc_solve(const MpcProblem& pb, std::span<const double> warm_start) {
  const MpcConfig& cfg = pb.cfg;
  if (cfg.horizon < 2) throw DomainError("MPC horizon must be at least 2");
  if (!(pb.v > 0.0)) throw DomainError("MPC needs positive speed");
  if (!(pb.wheelbase > 0.0)) throw DomainError("MPC needs a positive wheelbase");
  const auto m = static_cast<std::size_t>(cfg.horizon - 1);
  auto project = [&](const std::vector<double>& z) { return mpc_project(pb, z); };

  std::vector<double> x(m, 0.0);
  for (std::size_t i = 0; i < m && !warm_start.empty(); ++i) {
    x[i] = warm_start[std::min(i, warm_start.size() - 1)];
  }
  x = project(x);
  std::vector<double> g(m), x_new(m), g_new(m);
  double f = mpc_cost(pb, x, g);

  MpcSolution sol;
  std::vector<double> trial(m);
  auto pg_norm = [&](const std::vector<double>& xs, const std::vector<double>& gs) {
    for (std::size_t i = 0; i < m; ++i) trial[i] = xs[i] - gs[i];
    const std::vector<double> p = project(trial);
    double r = 0.0;
    for (std::size_t i = 0; i < m; ++i) r = std::max(r, std::abs(xs[i] - p[i]));
    return r;
  };

  double alpha = 1e-4;
  int it = 0;
  auto stationary = [&] { return pg_norm(x, g) < cfg.tol * std::max(1.0, std::abs(f)); };
  bool converged = stationary();
  while (!converged && it < cfg.max_iter) {
    ++it;
    bool accepted = false;
    double f_new = f;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t i = 0; i < m; ++i) trial[i] = x[i] - alpha * g[i];
      x_new = project(trial);
      double decrease = 0.0;
      for (std::size_t i = 0; i < m; ++i) decrease += g[i] * (x_new[i] - x[i]);
      f_new = mpc_cost(pb, x_new, g_new);
      if (f_new <= f + 1e-4 * decrease) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) break;

    std::vector<double> s(m), y(m);
    for (std::size_t i = 0; i < m; ++i) {
      s[i] = x_new[i] - x[i];
      y[i] = g_new[i] - g[i];
    }
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    sol.cost_history.push_back(f);
    converged = stationary();

    const double sy = dot(s, y);
    const double ss = dot(s, s);
    alpha = sy > 0.0 && ss > 0.0 ? ss / sy : 2.0 * alpha;
    alpha = std::clamp(alpha, 1e-12, 1e6);
  }

  sol.deltas = x;
  sol.cost = mpc_cost(pb, sol.deltas, {}, &sol.trajectory);
  sol.iterations = it;
  sol.converged = converged;
  return sol;
}

MpcSolution mpc_solve(const MpcConfig& cfg, const SimState& state, const PathPoly& poly,
                      const VehicleParams& params, std::span<const double> warm_start,
                      double prev_delta) {
  cfg.validate(params);
  MpcProblem pb;
  pb.cfg = cfg;
  pb.poly = poly;
  pb.v = state.vx;
  pb.wheelbase = params.wheelbase;
  pb.prev_delta = prev_delta;
  pb.max_step = params.max_steer_rate * cfg.dt;
  return mpc_solve(pb, warm_start);
}

std::vector<double> shift_warm_start(std::span<const double> previous, double steps) {
  if (!(steps >= 0.0)) throw DomainError("warm-start shift must be non-negative");
  std::vector<double> out(previous.size());
  if (previous.empty()) return out;
  const double last = static_cast<double>(previous.size() - 1);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double pos = std::min(static_cast<double>(i) + steps, last);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, previous.size() - 1);
    const double w = pos - static_cast<double>(lo);
    out[i] = (1.0 - w) * previous[lo] + w * previous[hi];
  }
  return out;
}

}  // namespace pathtrack
