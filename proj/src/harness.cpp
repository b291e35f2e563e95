#include "pathtrack/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <charconv>
#include <thread>

#include "pathtrack/lateral.hpp"
#include "pathtrack/lqr.hpp"
#include "pathtrack/mpc.hpp"

namespace pathtrack {

namespace {

// Hysteresis for switching between the kinematic bootstrap and the dynamic plant.
constexpr double kDynamicOn = kMinDynamicSpeed + 0.5;
constexpr double kDynamicOff = kMinDynamicSpeed + 0.1;
constexpr double kEndMargin = 0.5;

int periods(double rate, double dt) { return std::max(1, static_cast<int>(std::lround(1.0 / (rate * dt)))); }

std::string param_label(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os.precision(6);
  const ControllerSpec& c = cfg.controller;
  switch (c.type) {
    case ControllerType::PurePursuit: os << "k=" << c.pure_pursuit.k << " d=" << c.pure_pursuit.d; break;
    case ControllerType::Stanley: os << "k=" << c.stanley.k; break;
    case ControllerType::Pid: os << "kp=" << c.pid.gains.kp << " ki=" << c.pid.gains.ki << " kd=" << c.pid.gains.kd; break;
    case ControllerType::Lqr: os << "q1=" << c.lqr.q1 << (c.lqr.feedforward ? " ff" : " no-ff"); break;
    case ControllerType::Mpc: os << "N=" << c.mpc.horizon << " dt=" << c.mpc.dt; break;
  }
  return os.str();
}

}  // namespace

RunRecord run_scenario(const ScenarioConfig& cfg) { return run_scenario(cfg, build_course(cfg.course)); }

RunRecord run_scenario(const ScenarioConfig& cfg, const Course& course) {
  cfg.validate();
  VehicleParams params = cfg.vehicle;
  params.mass += cfg.payload;

  RunRecord rec;
  rec.meta.name = cfg.name;
  rec.meta.controller = to_string(cfg.controller.type);
  rec.meta.course = to_string(cfg.course.type);
  rec.meta.target_speed = cfg.target_speed;
  rec.meta.seed = cfg.seed;
  rec.meta.params = param_label(cfg);

  const double dt = cfg.dt;
  const double target = cfg.target_speed;
  const int ctrl_every = periods(cfg.controller.rate, dt);
  const int long_every = periods(cfg.longitudinal.rate, dt);
  const double ctrl_dt = ctrl_every * dt;
  const double long_dt = long_every * dt;
  const double travel = course.closed() ? cfg.course.laps * course.length() : course.length();
  const double duration = cfg.duration > 0.0 ? cfg.duration : 2.0 * travel / target + 30.0;
  const auto max_steps = static_cast<long>(std::ceil(duration / dt - 1e-9));

  // Initial pose: rear axle on the first path point, shifted along the normal.
  const PathPoint& p0 = course[0];
  SimState st;
  st.x = p0.x - std::sin(p0.theta) * cfg.initial.lateral_offset;
  st.y = p0.y + std::cos(p0.theta) * cfg.initial.lateral_offset;
  st.theta = wrap_angle(p0.theta + cfg.initial.heading_offset);
  st.vx = cfg.initial.speed.value_or(target);
  st.anchor = Anchor::RearAxle;
  if (cfg.initial.match_curvature) {
    st.delta = std::clamp(std::atan(params.wheelbase * p0.kappa), -params.max_steer, params.max_steer);
  }
  bool kinematic = cfg.plant == PlantModel::Kinematic || st.vx < kDynamicOn;
  if (!kinematic) st = to_dynamic(st, params);
  if (cfg.plant == PlantModel::Dynamic && kinematic) rec.message = "kinematic bootstrap below v_min";

  LongitudinalState lon{st.vx, params.drivetrain.drag * st.vx};
  const double trim = trim_throttle(target, params.drivetrain);
  PidLimits throttle_limits;
  throttle_limits.out_min = params.throttle_min;
  throttle_limits.out_max = params.throttle_max;
  PidState speed_pid;
  if (cfg.longitudinal.gains.ki > 0.0) speed_pid.integral = trim / cfg.longitudinal.gains.ki;
  const AdaptivePidConfig adaptive_cfg = cfg.longitudinal.adaptive();
  AdaptivePidState adaptive = make_adaptive_state(adaptive_cfg);
  PidGains current_gains = cfg.longitudinal.gains;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> unit(0.0, 1.0);

  SteeringPid steer_pid(cfg.controller.pid, params);
  Eigen::RowVector4d lqr_g = Eigen::RowVector4d::Zero();
  const MpcConfig& mpc_cfg = cfg.controller.mpc;
  const int mpc_every = std::max(1, static_cast<int>(std::lround(mpc_cfg.replan_period / ctrl_dt)));
  std::vector<double> warm;
  MpcSolution last_mpc;

  std::optional<std::size_t> hint_cg, hint_fa, hint_rear;
  double delta_cmd = st.delta;
  double throttle = trim;
  double dist = 0.0;
  double progress = 0.0;
  double last_s = 0.0;
  bool have_s = false;
  int ctrl_ticks = 0;

  try {
    if (cfg.controller.type == ControllerType::Lqr) lqr_g = lqr_gain(cfg.controller.lqr, params, target);

    for (long k = 0;; ++k) {
      const double t = static_cast<double>(k) * dt;
      if (k % ctrl_every == 0) {
        const TrackingError cg = tracking_errors(course, st, params, ReferencePoint::CenterOfGravity, hint_cg);
        const TrackingError fa = tracking_errors(course, st, params, ReferencePoint::FrontAxle, hint_fa);
        hint_cg = cg.index;
        hint_fa = fa.index;

        if (have_s) {
          double ds = cg.nearest.s - last_s;
          if (course.closed()) ds = std::remainder(ds, course.length());
          progress += ds;
        }
        last_s = cg.nearest.s;
        have_s = true;

        if (std::abs(cg.e) > cfg.divergence_limit) {
          rec.termination = Termination::Diverged;
          rec.message = "cross-track error exceeded the divergence limit";
          break;
        }
        const bool done = course.closed() ? progress >= travel
                                          : cg.nearest.s >= course.length() - kEndMargin;
        if (done) {
          rec.termination = Termination::Completed;
          break;
        }
        if (k >= max_steps) {
          rec.termination = Termination::Duration;
          break;
        }

        RunSample sample;
        try {
          switch (cfg.controller.type) {
            case ControllerType::PurePursuit: {
              const SteerCommand c = pure_pursuit(st, course, cfg.controller.pure_pursuit, params, hint_rear);
              delta_cmd = c.delta;
              hint_rear = c.index;
              break;
            }
            case ControllerType::Stanley:
              delta_cmd = stanley_law(-fa.theta_e, -fa.e, st.vx, cfg.controller.stanley, params);
              break;
            case ControllerType::Pid: delta_cmd = steer_pid.step(cg.e, ctrl_dt); break;
            case ControllerType::Lqr: {
              PathFrameState x;
              x.e_cg = cg.e;
              x.e_cg_dot = st.vx * std::sin(cg.theta_e) + st.vy * std::cos(cg.theta_e);
              x.theta_e = cg.theta_e;
              x.theta_e_dot = st.omega - cg.kappa * st.vx;
              delta_cmd = lqr_steering(x, lqr_g, cg.kappa, params, cfg.controller.lqr.feedforward);
              break;
            }
            case ControllerType::Mpc: {
              if (ctrl_ticks % mpc_every == 0) {
                const PolyFit fit = fit_path_local(course, st, params, mpc_cfg.fit_window, 2.0, hint_rear);
                hint_rear = fit.index;
                if (st.vx > 0.0) {
                  last_mpc = mpc_solve(mpc_cfg, st, fit.poly, params, warm, st.delta);
                  delta_cmd = last_mpc.deltas.front();
                  warm = shift_warm_start(last_mpc.deltas, mpc_every * ctrl_dt / mpc_cfg.dt);
                }
              }
              sample.solver_iterations = last_mpc.iterations;
              sample.solver_cost = last_mpc.cost;
              sample.solver_converged = last_mpc.converged;
              break;
            }
          }
        } catch (const EndOfCourse&) {
          rec.termination = Termination::Completed;
          break;
        }
        ++ctrl_ticks;

        if (k % long_every == 0) {
          const double measured = st.vx + (cfg.speed_noise > 0.0 ? cfg.speed_noise * unit(rng) : 0.0);
          switch (cfg.longitudinal.type) {
            case LongitudinalType::Ideal: throttle = trim; break;
            case LongitudinalType::Pid: {
              const PidOutput out = pid_step(cfg.longitudinal.gains, speed_pid, throttle_limits, target, measured, long_dt);
              speed_pid = out.state;
              throttle = out.u;
              break;
            }
            case LongitudinalType::AdaptivePid: {
              const AdaptivePidOutput out = adaptive_pid_step(adaptive_cfg, adaptive, speed_pid, throttle_limits,
                                                              target, measured, long_dt);
              adaptive = out.adaptive;
              speed_pid = out.pid;
              current_gains = adaptive.gains;
              throttle = out.u;
              break;
            }
          }
        }

        const Eigen::Vector2d cg_pos = reference_point(st, params, ReferencePoint::CenterOfGravity);
        sample.t = t;
        sample.s = dist;
        sample.x = cg_pos.x();
        sample.y = cg_pos.y();
        sample.theta = st.theta;
        sample.vx = st.vx;
        sample.vy = st.vy;
        sample.omega = st.omega;
        sample.delta_cmd = delta_cmd;
        sample.delta_act = st.delta;
        sample.throttle = throttle;
        sample.e_cg = cg.e;
        sample.e_fa = fa.e;
        sample.theta_e = cg.theta_e;
        sample.kp = current_gains.kp;
        sample.ki = current_gains.ki;
        sample.kd = current_gains.kd;
        sample.kinematic = kinematic;
        rec.samples.push_back(sample);
      } else if (k % long_every == 0 && cfg.longitudinal.type != LongitudinalType::Ideal) {
        const double measured = st.vx + (cfg.speed_noise > 0.0 ? cfg.speed_noise * unit(rng) : 0.0);
        if (cfg.longitudinal.type == LongitudinalType::Pid) {
          const PidOutput out = pid_step(cfg.longitudinal.gains, speed_pid, throttle_limits, target, measured, long_dt);
          speed_pid = out.state;
          throttle = out.u;
        } else {
          const AdaptivePidOutput out = adaptive_pid_step(adaptive_cfg, adaptive, speed_pid, throttle_limits,
                                                          target, measured, long_dt);
          adaptive = out.adaptive;
          speed_pid = out.pid;
          current_gains = adaptive.gains;
          throttle = out.u;
        }
      }

      // Steering: actuator model, then the physical rate and angle limits.
      double delta = actuate(delta_cmd, st.delta, cfg.actuator, dt);
      const double max_step = params.max_steer_rate * dt;
      delta = std::clamp(st.delta + std::clamp(delta - st.delta, -max_step, max_step), -params.max_steer,
                         params.max_steer);

      dist += std::hypot(st.vx, st.vy) * dt;
      LongitudinalState lon_next = lon;
      if (cfg.longitudinal.type == LongitudinalType::Ideal) {
        lon_next.v = target;
      } else {
        lon_next = step_longitudinal(lon, throttle, params.mass, params.drivetrain, dt);
      }

      if (kinematic) {
        st = step_kinematic(st, lon.v, (delta - st.delta) / dt, dt, params);
        st.vx = lon_next.v;
        st.omega = st.vx * std::tan(st.delta) / params.wheelbase;
        if (cfg.plant == PlantModel::Dynamic && st.vx > kDynamicOn) {
          st = to_dynamic(st, params);
          kinematic = false;
          rec.bootstrap_until = t + dt;
        }
      } else {
        st = step_dynamic(st, delta, params, dt);
        st.vx = lon_next.v;
        if (st.vx < kDynamicOff) {
          st = to_kinematic(st, params);
          kinematic = true;
        }
      }
      lon = lon_next;
    }
  } catch (const std::exception& e) {
    rec.termination = Termination::Failed;
    rec.message = e.what();
  }
  return rec;
}

namespace {

void put(std::ostream& out, double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.write(buf, res.ptr - buf);
}

const char* kRunColumns[] = {"t",         "s",        "x",        "y",     "theta",   "v_x",
                             "v_y",       "omega_z",  "delta_cmd", "delta_act", "throttle", "e_cg",
                             "e_fa",      "theta_e",  "kp",       "ki",    "kd",      "solver_iterations",
                             "solver_cost", "solver_converged", "kinematic"};

}  // namespace

void write_run_csv(std::ostream& out, const RunRecord& record) {
  for (std::size_t i = 0; i < std::size(kRunColumns); ++i) out << (i ? "," : "") << kRunColumns[i];
  out << '\n';
  for (const RunSample& r : record.samples) {
    for (double v : {r.t, r.s, r.x, r.y, r.theta, r.vx, r.vy, r.omega, r.delta_cmd, r.delta_act, r.throttle,
                     r.e_cg, r.e_fa, r.theta_e, r.kp, r.ki, r.kd}) {
      put(out, v);
      out << ',';
    }
    out << r.solver_iterations << ',';
    put(out, r.solver_cost);
    out << ',' << (r.solver_converged ? 1 : 0) << ',' << (r.kinematic ? 1 : 0) << '\n';
  }
}

std::vector<RunSample> read_run_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("empty run CSV");
  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) header.push_back(cell);
  }
  for (std::size_t i = 0; i < 14; ++i) {
    if (i >= header.size() || header[i] != kRunColumns[i]) {
      throw ConfigError("run CSV header does not match the expected column order");
    }
  }
  std::vector<RunSample> out;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<double> v;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        v.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ConfigError("malformed run CSV row " + std::to_string(row));
      }
    }
    if (v.size() != header.size()) throw ConfigError("run CSV row " + std::to_string(row) + " has wrong width");
    RunSample r;
    double* fields[] = {&r.t, &r.s, &r.x, &r.y, &r.theta, &r.vx, &r.vy, &r.omega, &r.delta_cmd,
                        &r.delta_act, &r.throttle, &r.e_cg, &r.e_fa, &r.theta_e};
    for (std::size_t i = 0; i < 14; ++i) *fields[i] = v[i];
    for (std::size_t i = 14; i < header.size(); ++i) {
      const std::string& h = header[i];
      if (h == "kp") r.kp = v[i];
      else if (h == "ki") r.ki = v[i];
      else if (h == "kd") r.kd = v[i];
      else if (h == "solver_iterations") r.solver_iterations = static_cast<int>(v[i]);
      else if (h == "solver_cost") r.solver_cost = v[i];
      else if (h == "solver_converged") r.solver_converged = v[i] != 0.0;
      else if (h == "kinematic") r.kinematic = v[i] != 0.0;
    }
    out.push_back(r);
  }
  return out;
}

void write_summary_header(std::ostream& out) {
  out << "name,controller,course,speed_kmph,seed,params,termination,samples,peak,steady_state,rms,"
         "converge_distance,steering_tv,throttle_tv,rise_time,overshoot,settling_time,sse,message\n";
}

void write_summary_row(std::ostream& out, const SweepRow& row) {
  const RunRecord& r = row.record;
  auto quote = [](const std::string& s) {
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  out << r.meta.name << ',' << r.meta.controller << ',' << r.meta.course << ',';
  put(out, r.meta.target_speed * 3.6);
  out << ',' << r.meta.seed << ',' << quote(r.meta.params) << ',' << to_string(r.termination) << ','
      << std::max(row.sample_count, r.samples.size());
  const MetricsSummary& m = row.summary;
  for (double v : {m.peak, m.steady_state, m.rms, m.converge_distance, m.steering_tv, m.throttle_tv,
                   m.velocity.rise_time, m.velocity.overshoot, m.velocity.settling_time, m.velocity.sse}) {
    out << ',';
    if (!row.summarized) continue;
    put(out, v);
  }
  out << ',' << quote(r.message) << '\n';
}

std::vector<ScenarioConfig> expand_sweep(const SweepSpec& spec) {
  std::vector<ScenarioConfig> out;
  auto applies = [](const std::string& key, ControllerType c, CourseType k) {
    auto scoped = [&](const std::string& prefix, const std::string& own) {
      if (key.rfind(prefix, 0) != 0) return true;
      const std::string rest = key.substr(prefix.size());
      const auto dot = rest.find('.');
      if (dot == std::string::npos) return true;
      return rest.substr(0, dot) == own;
    };
    return scoped("controller.", to_string(c)) && scoped("course.", to_string(k));
  };
  for (ControllerType c : spec.controllers) {
    for (CourseType k : spec.courses) {
      for (double v : spec.speeds) {
        ScenarioConfig base = spec.base;
        base.controller.type = c;
        base.course.type = k;
        base.target_speed = v;
        char speed[32];
        std::snprintf(speed, sizeof speed, "%gkmph", std::round(v * 36.0) / 10.0);
        const std::string stem = to_string(c) + "_" + to_string(k) + "_" + speed;

        std::vector<const GridAxis*> axes;
        for (const auto& a : spec.grid) {
          if (applies(a.key, c, k)) axes.push_back(&a);
        }
        std::vector<std::size_t> idx(axes.size(), 0);
        while (true) {
          ScenarioConfig cfg = base;
          std::string name = stem;
          for (std::size_t i = 0; i < axes.size(); ++i) {
            const double val = axes[i]->values[idx[i]];
            cfg = with_override(cfg, axes[i]->key, val);
            const std::string leaf = axes[i]->key.substr(axes[i]->key.rfind('.') + 1);
            char buf[48];
            std::snprintf(buf, sizeof buf, "_%s%g", leaf.c_str(), val);
            name += buf;
          }
          cfg.name = name;
          out.push_back(cfg);
          std::size_t d = 0;
          while (d < axes.size() && ++idx[d] == axes[d]->values.size()) idx[d++] = 0;
          if (d == axes.size()) break;
        }
      }
    }
  }
  std::map<std::string, int> seen;
  for (const auto& cfg : out) {
    if (++seen[cfg.name] > 1) throw ConfigError("sweep produces duplicate scenario name " + cfg.name);
  }
  return out;
}

std::vector<SweepRow> run_many(const std::vector<ScenarioConfig>& configs, const SweepOptions& opts) {
  std::vector<SweepRow> rows(configs.size());
  if (!opts.out_dir.empty()) std::filesystem::create_directories(opts.out_dir);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) {
      SweepRow& row = rows[i];
      row.config = configs[i];
      try {
        row.record = run_scenario(configs[i]);
      } catch (const std::exception& e) {
        row.record.meta.name = configs[i].name;
        row.record.meta.controller = to_string(configs[i].controller.type);
        row.record.meta.course = to_string(configs[i].course.type);
        row.record.meta.target_speed = configs[i].target_speed;
        row.record.meta.seed = configs[i].seed;
        row.record.termination = Termination::Failed;
        row.record.message = e.what();
      }
      row.sample_count = row.record.samples.size();
      if (row.record.samples.size() >= 100) {
        row.summary = summarize(row.record);
        row.summarized = true;
      }
      if (!opts.out_dir.empty()) {
        std::ofstream out(std::filesystem::path(opts.out_dir) / (configs[i].name + ".csv"));
        write_run_csv(out, row.record);
      }
      if (!opts.keep_samples) {
        row.record.samples.clear();
        row.record.samples.shrink_to_fit();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(opts.jobs, static_cast<unsigned>(configs.size())));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return a.config.name < b.config.name; });
  if (!opts.out_dir.empty()) {
    std::ofstream out(std::filesystem::path(opts.out_dir) / "summary.csv");
    write_summary_header(out);
    for (const auto& row : rows) write_summary_row(out, row);
  }
  return rows;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& opts) {
  return run_many(expand_sweep(spec), opts);
}

}  // namespace pathtrack
