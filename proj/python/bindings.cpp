#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pathtrack/common.hpp"
#include "pathtrack/config.hpp"
#include "pathtrack/estimation.hpp"
#include "pathtrack/harness.hpp"
#include "pathtrack/lqr.hpp"
#include "pathtrack/metrics.hpp"
#include "pathtrack/mpc.hpp"
#include "pathtrack/sysid.hpp"

namespace py = pybind11;
using namespace pathtrack;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <typename T, typename F>
Array column(const std::vector<T>& rows, F&& get) {
  Array out(static_cast<py::ssize_t>(rows.size()));
  auto w = out.mutable_unchecked<1>();
  for (std::size_t i = 0; i < rows.size(); ++i) w(static_cast<py::ssize_t>(i)) = get(rows[i]);
  return out;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

py::dict step_dict(const StepMetrics& m) {
  py::dict d;
  d["rise_time"] = m.rise_time;
  d["overshoot"] = m.overshoot;
  d["settling_time"] = m.settling_time;
  d["sse"] = m.sse;
  return d;
}

py::dict summary_dict(const MetricsSummary& s) {
  py::dict d;
  d["peak"] = s.peak;
  d["steady_state"] = s.steady_state;
  d["rms"] = s.rms;
  d["converge_distance"] = s.converge_distance;
  d["steering_tv"] = s.steering_tv;
  d["throttle_tv"] = s.throttle_tv;
  d["velocity"] = step_dict(s.velocity);
  return d;
}

py::dict run_dict(const RunRecord& rec) {
  const auto& r = rec.samples;
  py::dict cols;
  cols["t"] = column(r, [](const RunSample& x) { return x.t; });
  cols["s"] = column(r, [](const RunSample& x) { return x.s; });
  cols["x"] = column(r, [](const RunSample& x) { return x.x; });
  cols["y"] = column(r, [](const RunSample& x) { return x.y; });
  cols["theta"] = column(r, [](const RunSample& x) { return x.theta; });
  cols["v_x"] = column(r, [](const RunSample& x) { return x.vx; });
  cols["v_y"] = column(r, [](const RunSample& x) { return x.vy; });
  cols["omega_z"] = column(r, [](const RunSample& x) { return x.omega; });
  cols["delta_cmd"] = column(r, [](const RunSample& x) { return x.delta_cmd; });
  cols["delta_act"] = column(r, [](const RunSample& x) { return x.delta_act; });
  cols["throttle"] = column(r, [](const RunSample& x) { return x.throttle; });
  cols["e_cg"] = column(r, [](const RunSample& x) { return x.e_cg; });
  cols["e_fa"] = column(r, [](const RunSample& x) { return x.e_fa; });
  cols["theta_e"] = column(r, [](const RunSample& x) { return x.theta_e; });
  cols["kp"] = column(r, [](const RunSample& x) { return x.kp; });
  cols["ki"] = column(r, [](const RunSample& x) { return x.ki; });
  cols["kd"] = column(r, [](const RunSample& x) { return x.kd; });

  py::dict out;
  out["name"] = rec.meta.name;
  out["controller"] = rec.meta.controller;
  out["course"] = rec.meta.course;
  out["target_speed"] = rec.meta.target_speed;
  out["termination"] = to_string(rec.termination);
  out["message"] = rec.message;
  out["columns"] = cols;
  out["summary"] = rec.samples.empty() ? py::dict() : summary_dict(summarize(rec));
  return out;
}

Array course_array(const Course& c) {
  Array out({static_cast<py::ssize_t>(c.size()), py::ssize_t{5}});
  auto w = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto k = static_cast<py::ssize_t>(i);
    w(k, 0) = c[i].s;
    w(k, 1) = c[i].x;
    w(k, 2) = c[i].y;
    w(k, 3) = c[i].theta;
    w(k, 4) = c[i].kappa;
  }
  return out;
}

IoRecord io_record(const Array& t, const Array& u, const Array& v) {
  IoRecord rec{to_vector(t), to_vector(u), to_vector(v)};
  rec.validate();
  return rec;
}

py::dict io_dict(const IoRecord& rec) {
  py::dict d;
  d["t"] = Array(static_cast<py::ssize_t>(rec.t.size()), rec.t.data());
  d["u"] = Array(static_cast<py::ssize_t>(rec.u.size()), rec.u.data());
  d["v"] = Array(static_cast<py::ssize_t>(rec.v.size()), rec.v.data());
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Deterministic path-tracking simulation for Ackermann vehicles";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ConvergenceError>(m, "ConvergenceError", PyExc_RuntimeError);
  py::register_exception<FitError>(m, "FitError", PyExc_RuntimeError);
  py::register_exception<EndOfCourse>(m, "EndOfCourse", PyExc_RuntimeError);

  m.def("parse_speed", &parse_speed, py::arg("text"),
        "Speed in m/s from '10 kmph', '2.5 m/s' or a bare number.");

  m.def(
      "normalize_config", [](const std::string& text) { return to_toml(parse_scenario(text)); },
      py::arg("toml"), "Scenario TOML with every default filled in.");

  m.def(
      "run",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        ScenarioConfig cfg = parse_scenario(text);
        if (seed) cfg.seed = *seed;
        RunRecord rec;
        {
          py::gil_scoped_release release;
          rec = run_scenario(cfg);
        }
        return run_dict(rec);
      },
      py::arg("toml"), py::arg("seed") = py::none(),
      "Runs one scenario given as TOML text. Returns a dict with the run "
      "columns, the termination reason and the error summary.");

  m.def(
      "run_csv",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        ScenarioConfig cfg = parse_scenario(text);
        if (seed) cfg.seed = *seed;
        RunRecord rec;
        {
          py::gil_scoped_release release;
          rec = run_scenario(cfg);
        }
        std::ostringstream os;
        write_run_csv(os, rec);
        return os.str();
      },
      py::arg("toml"), py::arg("seed") = py::none(), "Runs one scenario and returns the run CSV.");

  m.def(
      "course",
      [](const std::string& type, const py::kwargs& kw) {
        CourseSpec spec;
        spec.type = parse_course_type(type);
        for (auto [k, v] : kw) {
          const auto key = k.cast<std::string>();
          const double x = v.cast<double>();
          if (key == "spacing") spec.spacing = x;
          else if (key == "length") spec.straight_length = spec.sine_length = x;
          else if (key == "radius") spec.radius = x;
          else if (key == "approach") spec.approach = x;
          else if (key == "transition") spec.transition = x;
          else if (key == "offset") spec.offset = x;
          else if (key == "exit") spec.exit = x;
          else if (key == "amplitude") spec.amplitude = x;
          else if (key == "wavelength") spec.wavelength = x;
          else throw py::key_error("unknown course parameter: " + key);
        }
        return course_array(build_course(spec));
      },
      py::arg("type"),
      "Generated course as an (N, 5) array with columns s, x, y, theta_p, kappa.");

  m.def(
      "summarize_error",
      [](const Array& s, const Array& e, double threshold, double steady_fraction) {
        const auto sv = to_vector(s);
        const auto ev = to_vector(e);
        return summary_dict(summarize_error(sv, ev, {threshold, steady_fraction}));
      },
      py::arg("s"), py::arg("e"), py::arg("threshold") = 0.05, py::arg("steady_fraction") = 0.2);

  m.def(
      "step_metrics",
      [](const Array& t, const Array& v, double setpoint) {
        const auto tv = to_vector(t);
        const auto vv = to_vector(v);
        return step_dict(step_response_metrics(tv, vv, setpoint));
      },
      py::arg("t"), py::arg("v"), py::arg("setpoint"));

  m.def(
      "total_variation", [](const Array& u) { return total_variation(to_vector(u)); },
      py::arg("u"));

  m.def(
      "solve_dare",
      [](const Eigen::MatrixXd& ad, const Eigen::MatrixXd& bd, const Eigen::MatrixXd& q,
         const Eigen::MatrixXd& r, int max_iter, double tol) {
        const DareSolution s = solve_dare(ad, bd, q, r, max_iter, tol);
        return py::make_tuple(s.p, s.g, s.iterations);
      },
      py::arg("ad"), py::arg("bd"), py::arg("q"), py::arg("r"), py::arg("max_iter") = 50000,
      py::arg("tol") = 1e-10, "Returns (P, G, iterations).");

  m.def(
      "discretize_zoh",
      [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double dt) {
        const DiscreteModel d = discretize_zoh(a, b, dt);
        return py::make_tuple(d.ad, d.bd);
      },
      py::arg("a"), py::arg("b"), py::arg("dt"));

  m.def(
      "lateral_matrices",
      [](double vx) {
        const LateralLtiModel mdl = build_lateral_matrices(VehicleParams{}, vx);
        return py::make_tuple(Eigen::MatrixXd(mdl.a), Eigen::VectorXd(mdl.b),
                              Eigen::VectorXd(mdl.c));
      },
      py::arg("vx"), "Path-frame (A, B, C) for the default vehicle.");

  m.def(
      "lqr_gain",
      [](double vx, double q1, double qu, double dt) {
        LqrConfig cfg;
        cfg.q1 = q1;
        cfg.qu = qu;
        cfg.dt = dt;
        return Eigen::RowVectorXd(lqr_gain(cfg, VehicleParams{}, vx));
      },
      py::arg("vx"), py::arg("q1") = LqrConfig{}.q1, py::arg("qu") = LqrConfig{}.qu,
      py::arg("dt") = LqrConfig{}.dt, "State feedback gain for the default vehicle.");

  m.def(
      "excite",
      [](double gain, double tau1, double tau2, const std::string& waveform, double amplitude,
         double offset, double period, double duration, double dt) {
        Excitation exc;
        if (waveform == "square") exc.waveform = Waveform::Square;
        else if (waveform == "sine") exc.waveform = Waveform::Sine;
        else throw py::value_error("waveform must be 'square' or 'sine'");
        exc.amplitude = amplitude;
        exc.offset = offset;
        exc.period = period;
        exc.duration = duration;
        exc.dt = dt;
        return io_dict(excite(LongitudinalPlant{gain, tau1, tau2, 0.0}, exc));
      },
      py::arg("gain") = 1.0, py::arg("tau1") = 1.0, py::arg("tau2") = 0.1,
      py::arg("waveform") = "square", py::arg("amplitude") = 0.1, py::arg("offset") = 0.1,
      py::arg("period") = 20.0, py::arg("duration") = 120.0, py::arg("dt") = 0.05,
      "Response of a second-order longitudinal ARX plant to a test input.");

  m.def(
      "fit_arx2",
      [](const Array& t, const Array& u, const Array& v) {
        const ArxFit fit = fit_arx2(io_record(t, u, v));
        py::dict d;
        d["gain"] = fit.plant.gain;
        d["tau1"] = fit.plant.tau1;
        d["tau2"] = fit.plant.tau2;
        d["a1"] = fit.coef.a1;
        d["a2"] = fit.coef.a2;
        d["b1"] = fit.coef.b1;
        d["r2"] = fit.r2;
        return d;
      },
      py::arg("t"), py::arg("u"), py::arg("v"), "Second-order ARX fit of an input/output record.");

  m.def(
      "dead_reckoning",
      [](double length, double radius, double speed, double wheel_speed_std, double yaw_rate_std,
         double yaw_rate_bias, double heading_std, std::uint64_t seed) {
        const auto truth = stadium_of_length(length, radius, speed, 100.0);
        SensorNoiseConfig cfg;
        cfg.wheel_speed_std = wheel_speed_std;
        cfg.yaw_rate_std = yaw_rate_std;
        cfg.yaw_rate_bias = yaw_rate_bias;
        cfg.heading_std = heading_std;
        cfg.seed = seed;
        cfg.validate();
        const auto sensors = simulate_sensors(truth, cfg);
        const auto res =
            run_dead_reckoning(truth, sensors, matched_noise(cfg), heading_std * heading_std);
        py::dict d;
        d["closure"] = res.closure.closure;
        d["length"] = res.closure.length;
        d["ratio"] = res.closure.ratio;
        Array est({static_cast<py::ssize_t>(res.estimate.size()), py::ssize_t{3}});
        auto w = est.mutable_unchecked<2>();
        for (std::size_t i = 0; i < res.estimate.size(); ++i) {
          for (int j = 0; j < 3; ++j) w(static_cast<py::ssize_t>(i), j) = res.estimate[i][j];
        }
        d["estimate"] = est;
        return d;
      },
      py::arg("length") = 500.0, py::arg("radius") = 20.0, py::arg("speed") = 5.0,
      py::arg("wheel_speed_std") = 0.02, py::arg("yaw_rate_std") = 0.005,
      py::arg("yaw_rate_bias") = 0.003, py::arg("heading_std") = 0.03, py::arg("seed") = 1,
      "EKF dead reckoning around a stadium loop; returns the loop closure error.");
}
