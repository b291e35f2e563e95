#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "pathtrack/longitudinal.hpp"
#include "pathtrack/metrics.hpp"
#include "pathtrack/vehicle.hpp"

namespace pathtrack {

/// Throttle to speed: K / ((tau1 s + 1)(tau2 s + 1)), optionally delayed.
struct LongitudinalPlant {
  double gain = 1.0;   // [m/s per unit throttle]
  double tau1 = 1.0;   // slow time constant [s]
  double tau2 = 0.1;   // fast time constant [s]
  double delay = 0.0;  // input delay [s], rounded to whole samples

  void validate() const;
};

/// Exact ARX(2,1) coefficients of the plant sampled at dt:
/// v_k = a1 v_{k-1} + a2 v_{k-2} + b1 u_{k-1}.
struct ArxCoefficients {
  double a1 = 0.0;
  double a2 = 0.0;
  double b1 = 0.0;
};
ArxCoefficients arx_coefficients(const LongitudinalPlant& plant, double dt);

/// Uniformly sampled input/output log. u[k] is held from t[k] to t[k+1].
struct IoRecord {
  std::vector<double> t;
  std::vector<double> u;
  std::vector<double> v;

  double dt() const;
  void validate() const;
};

void write_io_csv(std::ostream& out, const IoRecord& rec);
IoRecord read_io_csv(std::istream& in);

enum class Waveform { Square, Sine };

struct Excitation {
  Waveform waveform = Waveform::Square;
  double amplitude = 0.1;
  double offset = 0.1;
  double period = 20.0;
  double duration = 120.0;
  double dt = 0.05;

  double input(double t) const;
  void validate() const;
};

/// Response of the ARX model of `plant`, starting at rest.
IoRecord excite(const LongitudinalPlant& plant, const Excitation& exc);
/// Response of the full drivetrain simulator with vehicle mass `mass`.
IoRecord excite(const VehicleParams& params, double mass, const Excitation& exc);

struct ArxFit {
  LongitudinalPlant plant;
  ArxCoefficients coef;
  double r2 = 0.0;
};

/// Least-squares ARX(2,1) fit converted to gain and time constants.
/// Throws DomainError for short or constant-input records and FitError for
/// poles that are not real and inside (0, 1).
ArxFit fit_arx2(const IoRecord& record);

struct TuningSpec {
  double rise_time = 2.0;   // target 10-90 % rise time [s]
  double damping = 1.0;
  double dt = 0.02;         // controller sample time
  double step = 1.0;        // verification step size [m/s]
  double duration = 0.0;    // verification length, 0 = automatic
  PidLimits limits;
};

struct SpecReport {
  StepMetrics metrics;
  bool passes = false;  // sse < 2 %, overshoot < 10 %, settles
};

struct TuningResult {
  PidGains gains;             // discrete gains for pid_step (ki per sample)
  PidGains continuous;        // Kp, Ki [1/s], Kd [s]
  double wn = 0.0;            // placed natural frequency [rad/s]
  SpecReport report;
};

/// Pole placement: one PID zero cancels the slow plant pole and the
/// remaining closed-loop pair gets the requested damping, with its natural
/// frequency chosen so the undelayed, unsaturated step meets the rise time.
/// The gains are then verified by a step on the delayed, saturated plant.
TuningResult tune_pid_from_model(const LongitudinalPlant& plant, const TuningSpec& spec);

/// Closed-loop step on the ARX model of `plant` with discrete PID `gains`.
IoRecord simulate_pid_step(const LongitudinalPlant& plant, const PidGains& gains,
                           const PidLimits& limits, double step, double dt, double duration);

/// Speed-reference tracking on the full simulator with noisy speed feedback.
struct TrackingTask {
  std::vector<double> times{0.0, 20.0, 40.0, 60.0};  // reference breakpoints [s]
  std::vector<double> speeds{3.0, 6.0, 4.0, 4.0};    // piecewise-constant reference [m/s]
  double duration = 80.0;
  double dt = 0.02;
  double speed_noise = 0.02;  // [m/s] std of the measured speed
  std::uint64_t seed = 1;
};

struct TrackingTaskResult {
  IoRecord record;
  double throttle_tv = 0.0;
  double rms_error = 0.0;
};

TrackingTaskResult run_tracking_task(const VehicleParams& params, const PidGains& gains,
                                     const TrackingTask& task);

/// Speed step from rest on the full drivetrain simulator.
struct SpeedStep {
  double step = 1.0;       // [m/s]
  double duration = 30.0;  // [s]
  double dt = 0.02;        // controller sample time
  double plant_dt = 0.01;
};

struct SpeedStepResult {
  IoRecord record;
  std::vector<PidGains> gains;  // gains in use at each sample
  StepMetrics metrics;
};

/// Closed-loop step with either the simple PID (initial gains of `cfg`) or
/// the adaptive PID. `mass` replaces the vehicle mass.
SpeedStepResult simulate_speed_step(const VehicleParams& params, double mass,
                                    const AdaptivePidConfig& cfg, bool adaptive,
                                    const SpeedStep& step = {});

/// Lateral dynamics sample; delta is held until the next sample.
struct LateralSample {
  double t = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;
  double delta = 0.0;
};

struct StiffnessEstimate {
  double cf = 0.0;
  double cr = 0.0;
};

/// Least squares on the integrated linear lateral dynamics over consecutive
/// windows of `window` samples, with m, Iz, lf, lr taken from `params`.
StiffnessEstimate estimate_cornering_stiffness(std::span<const LateralSample> data,
                                               const VehicleParams& params,
                                               std::size_t window = 20);

}  // namespace pathtrack
