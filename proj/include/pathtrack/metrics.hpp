#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pathtrack/vehicle.hpp"

namespace pathtrack {

inline constexpr double kNever = std::numeric_limits<double>::infinity();

/// One logged control step. Positions are at the CG.
struct RunSample {
  double t = 0.0;
  double s = 0.0;  // distance travelled
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
  double delta_cmd = 0.0;
  double delta_act = 0.0;
  double throttle = 0.0;
  double e_cg = 0.0;
  double e_fa = 0.0;
  double theta_e = 0.0;
  // diagnostics
  double kp = 0.0;
  double ki = 0.0;
  double kd = 0.0;
  int solver_iterations = 0;
  double solver_cost = 0.0;
  bool solver_converged = true;
  bool kinematic = false;  // plant ran in kinematic bootstrap mode
};

struct RunMeta {
  std::string name;
  std::string controller;
  std::string course;
  double target_speed = 0.0;
  std::uint64_t seed = 0;
  std::string params;  // free-form parameter label, e.g. "k=0.35"
};

enum class Termination { Completed, Duration, Diverged, Failed };

struct RunRecord {
  RunMeta meta;
  std::vector<RunSample> samples;
  Termination termination = Termination::Completed;
  std::string message;
  double bootstrap_until = 0.0;  // time at which the dynamic plant took over

  bool diverged() const noexcept { return termination == Termination::Diverged; }
};

std::string to_string(Termination t);

struct StepMetrics {
  double rise_time = kNever;    // 10 to 90 %
  double overshoot = 0.0;       // percent of setpoint
  double settling_time = kNever;  // into the 2 % band
  double sse = 0.0;             // percent of setpoint
};

/// Step metrics for a response from zero toward `setpoint`. Times are
/// relative to t[0] and crossings are linearly interpolated.
StepMetrics step_response_metrics(std::span<const double> t, std::span<const double> v,
                                  double setpoint);

struct MetricsSummary {
  double peak = 0.0;
  double steady_state = 0.0;  // mean |e| over the final 20 % of distance
  double rms = 0.0;
  double converge_distance = kNever;
  double steering_tv = 0.0;
  double throttle_tv = 0.0;
  StepMetrics velocity;
};

struct SummarizeOptions {
  double threshold = 0.05;
  double steady_fraction = 0.2;
};

/// Summary of the CG cross-track error against distance travelled.
MetricsSummary summarize(const RunRecord& record, const SummarizeOptions& opts = {});

/// Same computations on bare channels; `s` must be non-decreasing.
MetricsSummary summarize_error(std::span<const double> s, std::span<const double> e,
                               const SummarizeOptions& opts = {});

double total_variation(std::span<const double> u);

}  // namespace pathtrack
