#include "pathtrack/sysid.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace pathtrack {

void LongitudinalPlant::validate() const {
  for (double v : {gain, tau1, tau2, delay}) require_finite(v, "plant parameter");
  if (!(gain > 0.0)) throw DomainError("plant gain must be positive");
  if (!(tau2 > 0.0) || tau1 < tau2) throw DomainError("plant needs tau1 >= tau2 > 0");
  if (delay < 0.0) throw DomainError("plant delay must be non-negative");
}

ArxCoefficients arx_coefficients(const LongitudinalPlant& plant, double dt) {
  plant.validate();
  if (!(dt > 0.0)) throw DomainError("dt must be positive");
  const double p1 = std::exp(-dt / plant.tau1);
  const double p2 = std::exp(-dt / plant.tau2);
  return {p1 + p2, -p1 * p2, plant.gain * (1.0 - p1) * (1.0 - p2)};
}

double IoRecord::dt() const {
  if (t.size() < 2) throw DomainError("record too short");
  return (t.back() - t.front()) / static_cast<double>(t.size() - 1);
}

void IoRecord::validate() const {
  if (t.size() != u.size() || t.size() != v.size()) throw DomainError("record channels differ in length");
  if (t.size() < 2) throw DomainError("record too short");
  const double h = dt();
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] > t[i - 1])) throw DomainError("record time must be strictly increasing");
    if (std::abs((t[i] - t[i - 1]) - h) > 1e-6 * h) throw DomainError("record must be uniformly sampled");
  }
}

void write_io_csv(std::ostream& out, const IoRecord& rec) {
  out << "t,u,v\n";
  out.precision(17);
  for (std::size_t i = 0; i < rec.t.size(); ++i) out << rec.t[i] << ',' << rec.u[i] << ',' << rec.v[i] << '\n';
}

IoRecord read_io_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,u,v", 0) != 0) {
    throw ConfigError("IO CSV must start with header t,u,v");
  }
  IoRecord rec;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream ls(line);
    double t = 0, u = 0, v = 0;
    char c1 = 0, c2 = 0;
    if (!(ls >> t >> c1 >> u >> c2 >> v) || c1 != ',' || c2 != ',') {
      throw ConfigError("malformed IO CSV row " + std::to_string(row));
    }
    rec.t.push_back(t);
    rec.u.push_back(u);
    rec.v.push_back(v);
  }
  rec.validate();
  return rec;
}

double Excitation::input(double t) const {
  const double phase = std::sin(2.0 * kPi * t / period);
  if (waveform == Waveform::Sine) return offset + amplitude * phase;
  return offset + (phase >= 0.0 ? amplitude : -amplitude);
}

void Excitation::validate() const {
  for (double v : {amplitude, offset, period, duration, dt}) require_finite(v, "excitation");
  if (!(period > 0.0) || !(dt > 0.0)) throw DomainError("period and dt must be positive");
  if (duration < 3.0 * period) throw DomainError("excitation must cover at least three periods");
}

namespace {

std::size_t sample_count(const Excitation& exc) {
  return static_cast<std::size_t>(std::llround(exc.duration / exc.dt)) + 1;
}

}  // namespace

IoRecord excite(const LongitudinalPlant& plant, const Excitation& exc) {
  exc.validate();
  const ArxCoefficients c = arx_coefficients(plant, exc.dt);
  const auto lag = static_cast<std::size_t>(std::llround(plant.delay / exc.dt));
  const std::size_t n = sample_count(exc);
  IoRecord rec;
  rec.t.resize(n);
  rec.u.resize(n);
  rec.v.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    rec.t[k] = exc.dt * static_cast<double>(k);
    rec.u[k] = exc.input(rec.t[k]);
  }
  for (std::size_t k = 1; k < n; ++k) {
    const double v1 = rec.v[k - 1];
    const double v2 = k >= 2 ? rec.v[k - 2] : 0.0;
    const double u = k >= 1 + lag ? rec.u[k - 1 - lag] : 0.0;
    rec.v[k] = c.a1 * v1 + c.a2 * v2 + c.b1 * u;
  }
  return rec;
}

IoRecord excite(const VehicleParams& params, double mass, const Excitation& exc) {
  exc.validate();
  if (!(mass > 0.0)) throw DomainError("mass must be positive");
  const std::size_t n = sample_count(exc);
  IoRecord rec;
  LongitudinalState s;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = exc.dt * static_cast<double>(k);
    const double u = std::clamp(exc.input(t), params.throttle_min, params.throttle_max);
    rec.t.push_back(t);
    rec.u.push_back(u);
    rec.v.push_back(s.v);
    s = step_longitudinal(s, u, mass, params.drivetrain, exc.dt);
  }
  return rec;
}

ArxFit fit_arx2(const IoRecord& record) {
  record.validate();
  const std::size_t n = record.t.size();
  if (n < 50) throw DomainError("ARX fit needs at least 50 samples");
  const auto [umin, umax] = std::minmax_element(record.u.begin(), record.u.end());
  if (!(*umax - *umin > 1e-12 * std::max(1.0, std::abs(*umax)))) {
    throw DomainError("input is constant: regression is rank deficient");
  }
  const auto rows = static_cast<Eigen::Index>(n - 2);
  Eigen::MatrixXd phi(rows, 3);
  Eigen::VectorXd y(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto k = static_cast<std::size_t>(r) + 2;
    phi(r, 0) = record.v[k - 1];
    phi(r, 1) = record.v[k - 2];
    phi(r, 2) = record.u[k - 1];
    y[r] = record.v[k];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(phi);
  if (qr.rank() < 3) throw DomainError("ARX regression is rank deficient");
  const Eigen::Vector3d theta = qr.solve(y);

  ArxFit fit;
  fit.coef = {theta[0], theta[1], theta[2]};
  const double ss_res = (phi * theta - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

  const double a1 = theta[0];
  const double a2 = theta[1];
  double disc = a1 * a1 + 4.0 * a2;
  auto describe = [&] {
    std::ostringstream os;
    os.precision(10);
    os << " (a1=" << a1 << ", a2=" << a2 << ", b1=" << theta[2] << ")";
    return os.str();
  };
  if (disc < 0.0) {
    if (disc > -1e-12) disc = 0.0;
    else throw FitError("ARX poles are complex" + describe());
  }
  const double root = std::sqrt(disc);
  const double p1 = 0.5 * (a1 + root);
  const double p2 = 0.5 * (a1 - root);
  if (!(p1 < 1.0) || !(p2 > 0.0)) throw FitError("ARX poles are not inside (0, 1)" + describe());
  const double dt = record.dt();
  fit.plant.tau1 = -dt / std::log(p1);
  fit.plant.tau2 = -dt / std::log(p2);
  fit.plant.gain = theta[2] / (1.0 - a1 - a2);
  if (!(fit.plant.gain > 0.0)) throw FitError("ARX gain is not positive" + describe());
  return fit;
}

IoRecord simulate_pid_step(const LongitudinalPlant& plant, const PidGains& gains,
                           const PidLimits& limits, double step, double dt, double duration) {
  const ArxCoefficients c = arx_coefficients(plant, dt);
  const auto lag = static_cast<std::size_t>(std::llround(plant.delay / dt));
  const auto n = static_cast<std::size_t>(std::llround(duration / dt)) + 1;
  IoRecord rec;
  PidState pid;
  rec.t.resize(n);
  rec.u.assign(n, 0.0);
  rec.v.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    rec.t[k] = dt * static_cast<double>(k);
    if (k >= 1) {
      const double v2 = k >= 2 ? rec.v[k - 2] : 0.0;
      const double u = k >= 1 + lag ? rec.u[k - 1 - lag] : 0.0;
      rec.v[k] = c.a1 * rec.v[k - 1] + c.a2 * v2 + c.b1 * u;
    }
    const PidOutput out = pid_step(gains, pid, limits, step, rec.v[k], dt);
    pid = out.state;
    rec.u[k] = out.u;
  }
  return rec;
}

namespace {

/// PID whose first zero cancels the slow plant pole; the remaining loop
/// K Kc (b s + 1) / (s (tau2 s + 1)) has closed-loop poles s^2 + 2 z wn s + wn^2
/// whenever b >= 0. Below that frequency b is clamped to zero (PI).
PidGains placement_gains(const LongitudinalPlant& plant, double wn, double z) {
  const double kc = wn * wn * plant.tau2 / plant.gain;
  const double b = std::max(0.0, (2.0 * z * wn * plant.tau2 - 1.0) / (wn * wn * plant.tau2));
  return {kc * (plant.tau1 + b), kc, kc * plant.tau1 * b};
}

PidGains discrete(const PidGains& c, double dt) { return {c.kp, c.ki * dt, c.kd}; }

}  // namespace

TuningResult tune_pid_from_model(const LongitudinalPlant& plant, const TuningSpec& spec) {
  plant.validate();
  if (!(spec.rise_time > 0.0) || !(spec.damping > 0.0) || !(spec.dt > 0.0) || !(spec.step > 0.0)) {
    throw DomainError("tuning spec values must be positive");
  }
  const double duration =
      spec.duration > 0.0 ? spec.duration : std::max(20.0 * spec.rise_time, 5.0 * plant.tau1);
  LongitudinalPlant undelayed = plant;
  undelayed.delay = 0.0;
  PidLimits open;
  open.out_min = -1e12;
  open.out_max = 1e12;
  auto rise_at = [&](double wn) {
    const PidGains g = discrete(placement_gains(undelayed, wn, spec.damping), spec.dt);
    const IoRecord r = simulate_pid_step(undelayed, g, open, spec.step, spec.dt, duration);
    return step_response_metrics(r.t, r.v, spec.step).rise_time;
  };
  // Rise time falls as wn grows; bisect in log space.
  double lo = 1e-3 / plant.tau1;
  double hi = 0.5 / spec.dt;
  if (rise_at(hi) > spec.rise_time) throw DomainError("target rise time is faster than the sample rate allows");
  for (int i = 0; i < 100 && hi / lo > 1.0 + 1e-10; ++i) {
    const double mid = std::sqrt(lo * hi);
    (rise_at(mid) > spec.rise_time ? lo : hi) = mid;
  }

  TuningResult out;
  out.wn = std::sqrt(lo * hi);
  out.continuous = placement_gains(undelayed, out.wn, spec.damping);
  out.gains = discrete(out.continuous, spec.dt);
  const IoRecord rec = simulate_pid_step(plant, out.gains, spec.limits, spec.step, spec.dt, duration);
  out.report.metrics = step_response_metrics(rec.t, rec.v, spec.step);
  const StepMetrics& m = out.report.metrics;
  out.report.passes = m.sse < 2.0 && m.overshoot < 10.0 && std::isfinite(m.settling_time);
  return out;
}

TrackingTaskResult run_tracking_task(const VehicleParams& params, const PidGains& gains,
                                     const TrackingTask& task) {
  if (task.times.size() != task.speeds.size() || task.times.empty()) {
    throw DomainError("tracking task breakpoints and speeds must match");
  }
  if (!(task.dt > 0.0) || !(task.duration > 0.0)) throw DomainError("tracking task timing must be positive");
  std::mt19937_64 rng(task.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  PidLimits limits;
  limits.out_min = params.throttle_min;
  limits.out_max = params.throttle_max;
  PidState pid;
  LongitudinalState s;
  TrackingTaskResult out;
  const auto n = static_cast<std::size_t>(std::llround(task.duration / task.dt)) + 1;
  double sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = task.dt * static_cast<double>(k);
    std::size_t seg = 0;
    while (seg + 1 < task.times.size() && t >= task.times[seg + 1]) ++seg;
    const double ref = task.speeds[seg];
    const double measured = s.v + task.speed_noise * noise(rng);
    const PidOutput u = pid_step(gains, pid, limits, ref, measured, task.dt);
    pid = u.state;
    out.record.t.push_back(t);
    out.record.u.push_back(u.u);
    out.record.v.push_back(s.v);
    sq += (ref - s.v) * (ref - s.v);
    s = step_longitudinal(s, u.u, params.mass, params.drivetrain, task.dt);
  }
  out.throttle_tv = total_variation(out.record.u);
  out.rms_error = std::sqrt(sq / static_cast<double>(n));
  return out;
}

SpeedStepResult simulate_speed_step(const VehicleParams& params, double mass,
                                    const AdaptivePidConfig& cfg, bool adaptive,
                                    const SpeedStep& step) {
  if (!(step.dt > 0.0) || !(step.plant_dt > 0.0) || !(step.duration > 0.0)) {
    throw DomainError("speed step timing must be positive");
  }
  if (!(mass > 0.0)) throw DomainError("mass must be positive");
  const auto sub = std::max<long long>(1, std::llround(step.dt / step.plant_dt));
  const double h = step.dt / static_cast<double>(sub);
  PidLimits limits;
  limits.out_min = params.throttle_min;
  limits.out_max = params.throttle_max;
  PidState pid;
  AdaptivePidState ad = make_adaptive_state(cfg);
  LongitudinalState s;
  SpeedStepResult out;
  const auto n = static_cast<std::size_t>(std::llround(step.duration / step.dt)) + 1;
  for (std::size_t k = 0; k < n; ++k) {
    double u = 0.0;
    if (adaptive) {
      const AdaptivePidOutput o = adaptive_pid_step(cfg, ad, pid, limits, step.step, s.v, step.dt);
      u = o.u;
      ad = o.adaptive;
      pid = o.pid;
      out.gains.push_back(ad.gains);
    } else {
      const PidOutput o = pid_step(cfg.initial, pid, limits, step.step, s.v, step.dt);
      u = o.u;
      pid = o.state;
      out.gains.push_back(cfg.initial);
    }
    out.record.t.push_back(step.dt * static_cast<double>(k));
    out.record.u.push_back(u);
    out.record.v.push_back(s.v);
    for (long long i = 0; i < sub; ++i) s = step_longitudinal(s, u, mass, params.drivetrain, h);
  }
  out.metrics = step_response_metrics(out.record.t, out.record.v, step.step);
  return out;
}

StiffnessEstimate estimate_cornering_stiffness(std::span<const LateralSample> data,
                                               const VehicleParams& params, std::size_t window) {
  if (window < 1) throw DomainError("window must be at least one sample");
  if (data.size() < window + 1) throw DomainError("not enough samples for one window");
  for (const auto& d : data) {
    if (!(d.vx > kMinDynamicSpeed)) throw DomainError("stiffness estimation needs vx > v_min");
  }
  const double m = params.mass;
  const double lf = params.lf;
  const double lr = params.lr;
  // Per-sample regressors: phi_f = delta - (vy + lf w)/vx, phi_r = (lr w - vy)/vx.
  auto front_state = [&](const LateralSample& d) { return (d.vy + lf * d.omega) / d.vx; };
  auto rear_state = [&](const LateralSample& d) { return (lr * d.omega - d.vy) / d.vx; };

  const std::size_t windows = (data.size() - 1) / window;
  Eigen::MatrixXd a(static_cast<Eigen::Index>(2 * windows), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(2 * windows));
  for (std::size_t w = 0; w < windows; ++w) {
    const std::size_t i0 = w * window;
    const std::size_t i1 = i0 + window;
    double int_f = 0.0, int_r = 0.0, int_vxw = 0.0;
    for (std::size_t k = i0; k < i1; ++k) {
      const LateralSample& p = data[k];
      const LateralSample& q = data[k + 1];
      const double h = q.t - p.t;
      if (!(h > 0.0)) throw DomainError("samples must be time ordered");
      int_f += p.delta * h - 0.5 * h * (front_state(p) + front_state(q));
      int_r += 0.5 * h * (rear_state(p) + rear_state(q));
      int_vxw += 0.5 * h * (p.vx * p.omega + q.vx * q.omega);
    }
    const auto r = static_cast<Eigen::Index>(2 * w);
    a(r, 0) = int_f;
    a(r, 1) = int_r;
    b[r] = m * (data[i1].vy - data[i0].vy + int_vxw);
    a(r + 1, 0) = lf * int_f;
    a(r + 1, 1) = -lr * int_r;
    b[r + 1] = params.iz * (data[i1].omega - data[i0].omega);
  }
  // Normalise rows so both equations carry comparable weight.
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const double scale = r % 2 == 0 ? 1.0 / m : 1.0 / params.iz;
    a.row(r) *= scale;
    b[r] *= scale;
  }
  const double col_max = a.cwiseAbs().maxCoeff();
  if (!(col_max > 1e-12)) throw FitError("data do not excite the lateral dynamics");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-9);
  if (qr.rank() < 2) throw FitError("lateral regression is rank deficient");
  const Eigen::Vector2d c = qr.solve(b);
  return {c[0], c[1]};
}

}  // namespace pathtrack
