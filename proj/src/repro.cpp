#include "pathtrack/repro.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "pathtrack/estimation.hpp"
#include "pathtrack/harness.hpp"
#include "pathtrack/plot.hpp"
#include "pathtrack/sysid.hpp"

namespace pathtrack {

namespace fs = std::filesystem;

const std::vector<std::string>& repro_figures() {
  static const std::vector<std::string> names{"fig6",  "fig8",  "fig9",  "fig10", "fig11",
                                              "fig12", "fig13", "fig14", "fig15", "loop"};
  return names;
}

namespace {

const std::vector<CourseType> kAllCourses{CourseType::Straight, CourseType::Circle,
                                          CourseType::LaneChange, CourseType::Sine};
const std::vector<double> kSpeeds{10.0 / 3.6, 20.0 / 3.6, 35.0 / 3.6};

SweepSpec lateral(ControllerType c, std::vector<CourseType> courses, std::vector<GridAxis> grid) {
  SweepSpec s;
  s.controllers = {c};
  s.courses = std::move(courses);
  s.speeds = kSpeeds;
  s.grid = std::move(grid);
  return s;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

std::string speed_tag(double v) { return fmt("%gkmph", std::round(v * 36.0) / 10.0); }

/// Runs a sweep into dir and plots each (controller, course, speed) group.
void sweep_and_plot(const SweepSpec& spec, const fs::path& dir, const std::string& sub,
                    unsigned jobs, ReproResult& res) {
  SweepOptions opts;
  opts.jobs = jobs;
  opts.out_dir = (dir / sub).string();
  opts.keep_samples = true;
  const std::vector<SweepRow> rows = run_sweep(spec, opts);

  std::map<std::string, std::vector<const SweepRow*>> groups;
  for (const auto& row : rows) {
    const std::string key = to_string(row.config.controller.type) + "_" +
                            to_string(row.config.course.type) + "_" + speed_tag(row.config.target_speed);
    groups[key].push_back(&row);
    res.files.push_back((fs::path(sub) / (row.config.name + ".csv")).string());
    std::string line = row.config.name + ": " + to_string(row.record.termination);
    if (row.summarized) {
      line += fmt(", peak %.3f m", row.summary.peak) + fmt(", steady %.3f m", row.summary.steady_state);
    }
    res.lines.push_back(line);
  }
  res.files.push_back((fs::path(sub) / "summary.csv").string());

  const bool by_controller = spec.controllers.size() > 1;
  if (by_controller) {
    groups.clear();
    for (const auto& row : rows) {
      groups[to_string(row.config.course.type) + "_" + speed_tag(row.config.target_speed)].push_back(&row);
    }
  }
  for (const auto& [key, members] : groups) {
    std::vector<std::vector<RunSample>> runs;
    std::vector<std::string> labels;
    for (const SweepRow* r : members) {
      if (r->record.samples.empty()) continue;
      runs.push_back(r->record.samples);
      std::string label = by_controller ? r->record.meta.controller : r->record.meta.params;
      if (r->record.diverged()) label += " (diverged)";
      labels.push_back(label);
    }
    if (runs.empty()) continue;
    const std::string file = key + ".svg";
    write_text(dir / sub / file, emit_plot(runs, labels, PlotKind::ErrorVsDistance, false, key));
    res.files.push_back((fs::path(sub) / file).string());
  }
}

PlotSeries io_series(const IoRecord& rec, const std::string& label, bool input) {
  return {label, rec.t, input ? rec.u : rec.v};
}

void write_io(const fs::path& path, const IoRecord& rec) {
  std::ofstream out(path);
  write_io_csv(out, rec);
}

LongitudinalSpec default_longitudinal() { return LongitudinalSpec{}; }

/// Mass-change comparison for one controller variant.
void mass_change(bool adaptive, const fs::path& dir, ReproResult& res) {
  const VehicleParams params;
  const AdaptivePidConfig cfg = default_longitudinal().adaptive();
  std::vector<PlotSeries> series;
  std::ofstream metrics(dir / "metrics.csv");
  metrics << "mass,rise_time,overshoot,settling_time,sse\n";
  std::vector<StepMetrics> m;
  for (double payload : {0.0, 180.0}) {
    const double mass = params.mass + payload;
    const SpeedStepResult r = simulate_speed_step(params, mass, cfg, adaptive);
    const std::string stem = fmt("step_m%g", mass);
    write_io(dir / (stem + ".csv"), r.record);
    res.files.push_back(stem + ".csv");
    series.push_back(io_series(r.record, fmt("m = %g kg", mass), false));
    metrics << mass << ',' << r.metrics.rise_time << ',' << r.metrics.overshoot << ','
            << r.metrics.settling_time << ',' << r.metrics.sse << '\n';
    m.push_back(r.metrics);
    res.lines.push_back(fmt("mass %g kg:", mass) + fmt(" rise %.3f s", r.metrics.rise_time) +
                        fmt(", overshoot %.2f %%", r.metrics.overshoot) +
                        fmt(", settling %.3f s", r.metrics.settling_time));
  }
  res.lines.push_back(fmt("change in rise time %.4f s", std::abs(m[1].rise_time - m[0].rise_time)) +
                      fmt(", change in settling time %.4f s", std::abs(m[1].settling_time - m[0].settling_time)));
  res.files.push_back("metrics.csv");
  PlotStyle style;
  style.title = adaptive ? "adaptive PID, unit speed step" : "simple PID, unit speed step";
  style.x_label = "time [s]";
  style.y_label = "speed [m/s]";
  write_text(dir / "step.svg", render_svg(series, style));
  res.files.push_back("step.svg");
}

void identification(const fs::path& dir, ReproResult& res) {
  const VehicleParams params;
  std::ofstream fits(dir / "fits.csv");
  fits << "waveform,gain,tau1,tau2,r2,kp,ki,kd,throttle_tv\n";
  std::vector<PlotSeries> excitation, steps;
  for (Waveform w : {Waveform::Square, Waveform::Sine}) {
    const std::string name = w == Waveform::Square ? "square" : "sine";
    Excitation e;
    e.waveform = w;
    e.period = 40.0;
    e.duration = 200.0;
    const IoRecord rec = excite(params, params.mass, e);
    write_io(dir / ("excitation_" + name + ".csv"), rec);
    res.files.push_back("excitation_" + name + ".csv");
    excitation.push_back(io_series(rec, name + " response", false));

    const ArxFit fit = fit_arx2(rec);
    TuningSpec spec;
    const TuningResult tuned = tune_pid_from_model(fit.plant, spec);
    const TrackingTaskResult track = run_tracking_task(params, tuned.gains, TrackingTask{});
    fits << name << ',' << fit.plant.gain << ',' << fit.plant.tau1 << ',' << fit.plant.tau2 << ','
         << fit.r2 << ',' << tuned.gains.kp << ',' << tuned.gains.ki << ',' << tuned.gains.kd << ','
         << track.throttle_tv << '\n';
    res.lines.push_back(name + fmt(": K %.3f", fit.plant.gain) + fmt(", tau1 %.3f s", fit.plant.tau1) +
                        fmt(", tau2 %.3f s", fit.plant.tau2) + fmt(", kp %.4f", tuned.gains.kp) +
                        fmt(", throttle TV %.1f", track.throttle_tv));

    if (w == Waveform::Sine) {
      AdaptivePidConfig cfg = default_longitudinal().adaptive();
      cfg.initial = tuned.gains;
      for (bool adaptive : {false, true}) {
        const SpeedStepResult r = simulate_speed_step(params, params.mass, cfg, adaptive);
        const std::string stem = adaptive ? "step_adaptive" : "step_pid";
        write_io(dir / (stem + ".csv"), r.record);
        res.files.push_back(stem + ".csv");
        steps.push_back(io_series(r.record, adaptive ? "adaptive PID" : "simple PID", false));
      }
    }
  }
  res.files.push_back("fits.csv");
  PlotStyle style;
  style.x_label = "time [s]";
  style.y_label = "speed [m/s]";
  style.title = "speed response to throttle excitation";
  write_text(dir / "excitation.svg", render_svg(excitation, style));
  style.title = "unit step with sine-identified gains";
  write_text(dir / "step.svg", render_svg(steps, style));
  res.files.push_back("excitation.svg");
  res.files.push_back("step.svg");
}

void loop_closure(const fs::path& dir, ReproResult& res) {
  const auto truth = stadium_of_length(235.0, 20.0, 5.0, 100.0);
  SensorNoiseConfig noise;
  const auto sensors = simulate_sensors(truth, noise);
  const DeadReckoningResult dr =
      run_dead_reckoning(truth, sensors, matched_noise(noise), noise.heading_std * noise.heading_std);
  {
    std::ofstream out(dir / "ekf.csv");
    write_ekf_csv(out, truth, dr);
  }
  PlotSeries t{"truth", {}, {}}, e{"EKF estimate", {}, {}};
  for (std::size_t i = 0; i < truth.size(); ++i) {
    t.x.push_back(truth[i].x);
    t.y.push_back(truth[i].y);
    e.x.push_back(dr.estimate[i][0]);
    e.y.push_back(dr.estimate[i][1]);
  }
  PlotStyle style;
  style.title = "loop closure";
  style.x_label = "x [m]";
  style.y_label = "y [m]";
  style.equal_aspect = true;
  const std::vector<PlotSeries> series{t, e};
  write_text(dir / "trajectory.svg", render_svg(series, style));
  res.files = {"ekf.csv", "trajectory.svg"};
  res.lines.push_back(fmt("loop length %.1f m", dr.closure.length) +
                      fmt(", closure %.3f m", dr.closure.closure) +
                      fmt(" (%.3f %%)", 100.0 * dr.closure.ratio));
}

}  // namespace

SweepSpec figure_sweep(const std::string& figure) {
  if (figure == "fig10") {
    SweepSpec s;
    s.controllers = {ControllerType::PurePursuit, ControllerType::Stanley, ControllerType::Pid,
                     ControllerType::Lqr};
    s.courses = {CourseType::Straight};
    s.speeds = {10.0 / 3.6};
    s.base.initial.lateral_offset = 1.0;
    return s;
  }
  if (figure == "fig11") {
    return lateral(ControllerType::PurePursuit, kAllCourses,
                   {{"controller.pure_pursuit.k", {0.1, 0.35, 1.0}}});
  }
  if (figure == "fig12") {
    return lateral(ControllerType::Stanley, kAllCourses, {{"controller.stanley.k", {1.5, 2.5, 5.0}}});
  }
  if (figure == "fig13") {
    return lateral(ControllerType::Pid, kAllCourses, {{"controller.pid.kp", {0.4, 0.8, 1.6}}});
  }
  if (figure == "fig14") {
    return lateral(ControllerType::Lqr, kAllCourses, {{"controller.lqr.feedforward", {0.0, 1.0}}});
  }
  if (figure == "fig15") {
    return lateral(ControllerType::Mpc, {CourseType::LaneChange, CourseType::Sine}, {});
  }
  throw ConfigError("no sweep preset for '" + figure + "'");
}

ReproResult reproduce(const std::string& figure, const ReproOptions& opts) {
  const auto& names = repro_figures();
  if (std::find(names.begin(), names.end(), figure) == names.end()) {
    throw ConfigError("unknown figure '" + figure + "'");
  }
  const fs::path dir = fs::path(opts.out_dir) / figure;
  fs::create_directories(dir);
  ReproResult res;
  if (figure == "fig6") {
    identification(dir, res);
  } else if (figure == "fig8" || figure == "fig9") {
    mass_change(figure == "fig9", dir, res);
  } else if (figure == "loop") {
    loop_closure(dir, res);
  } else if (figure == "fig10") {
    sweep_and_plot(figure_sweep(figure), dir, "convergence", opts.jobs, res);
    SweepSpec ff = lateral(ControllerType::Lqr, {CourseType::Circle},
                           {{"controller.lqr.feedforward", {0.0, 1.0}}});
    sweep_and_plot(ff, dir, "feedforward", opts.jobs, res);
  } else {
    sweep_and_plot(figure_sweep(figure), dir, ".", opts.jobs, res);
  }
  for (auto& f : res.files) f = (fs::path(figure) / f).lexically_normal().string();
  return res;
}

}  // namespace pathtrack
