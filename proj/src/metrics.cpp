#include "pathtrack/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace pathtrack {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::Duration: return "duration";
    case Termination::Diverged: return "diverged";
    case Termination::Failed: return "failed";
  }
  return "unknown";
}

double total_variation(std::span<const double> u) {
  double tv = 0.0;
  for (std::size_t i = 1; i < u.size(); ++i) tv += std::abs(u[i] - u[i - 1]);
  return tv;
}

namespace {

/// Time at which the series first reaches `level` from below.
double first_crossing(std::span<const double> t, std::span<const double> v, double level) {
  if (v[0] >= level) return t[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (v[i] >= level) {
      const double w = (level - v[i - 1]) / (v[i] - v[i - 1]);
      return t[i - 1] + w * (t[i] - t[i - 1]);
    }
  }
  return kNever;
}

}  // namespace

StepMetrics step_response_metrics(std::span<const double> t, std::span<const double> v,
                                  double setpoint) {
  if (!(setpoint > 0.0)) throw DomainError("setpoint must be positive");
  if (t.size() != v.size() || t.size() < 2) throw DomainError("need matching series of length >= 2");
  StepMetrics m;
  const double t10 = first_crossing(t, v, 0.1 * setpoint);
  const double t90 = first_crossing(t, v, 0.9 * setpoint);
  m.rise_time = (t10 == kNever || t90 == kNever) ? kNever : t90 - t10;
  m.overshoot = std::max(0.0, *std::max_element(v.begin(), v.end()) - setpoint) / setpoint * 100.0;

  const double band = 0.02 * setpoint;
  std::size_t last_out = v.size();
  for (std::size_t i = v.size(); i-- > 0;) {
    if (std::abs(v[i] - setpoint) > band) {
      last_out = i;
      break;
    }
  }
  if (last_out == v.size()) {
    m.settling_time = 0.0;
  } else if (last_out + 1 == v.size()) {
    m.settling_time = kNever;
  } else {
    const double a = std::abs(v[last_out] - setpoint);
    const double b = std::abs(v[last_out + 1] - setpoint);
    const double w = a > b ? (a - band) / (a - b) : 1.0;
    m.settling_time = t[last_out] + w * (t[last_out + 1] - t[last_out]) - t[0];
  }

  const std::size_t tail = std::max<std::size_t>(1, v.size() / 10);
  double mean = 0.0;
  for (std::size_t i = v.size() - tail; i < v.size(); ++i) mean += v[i];
  mean /= static_cast<double>(tail);
  m.sse = std::abs(mean - setpoint) / setpoint * 100.0;
  return m;
}

MetricsSummary summarize_error(std::span<const double> s, std::span<const double> e,
                               const SummarizeOptions& opts) {
  if (s.size() != e.size()) throw DomainError("distance and error series differ in length");
  if (s.size() < 2) throw DomainError("need at least two samples");
  if (!(opts.threshold > 0.0)) throw DomainError("threshold must be positive");
  if (!(opts.steady_fraction > 0.0 && opts.steady_fraction <= 1.0)) {
    throw DomainError("steady fraction must be in (0, 1]");
  }
  MetricsSummary out;
  double sq = 0.0;
  for (double v : e) {
    out.peak = std::max(out.peak, std::abs(v));
    sq += v * v;
  }
  out.rms = std::sqrt(sq / static_cast<double>(e.size()));

  const double s_start = s.front() + (1.0 - opts.steady_fraction) * (s.back() - s.front());
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] >= s_start) {
      sum += std::abs(e[i]);
      ++count;
    }
  }
  out.steady_state = count ? sum / static_cast<double>(count) : std::abs(e.back());

  std::size_t last_out = e.size();
  for (std::size_t i = e.size(); i-- > 0;) {
    if (std::abs(e[i]) >= opts.threshold) {
      last_out = i;
      break;
    }
  }
  if (last_out == e.size()) {
    out.converge_distance = 0.0;
  } else if (last_out + 1 == e.size()) {
    out.converge_distance = kNever;
  } else {
    const double a = std::abs(e[last_out]);
    const double b = std::abs(e[last_out + 1]);
    const double w = a > b ? (a - opts.threshold) / (a - b) : 1.0;
    out.converge_distance = s[last_out] + w * (s[last_out + 1] - s[last_out]) - s.front();
  }
  return out;
}

MetricsSummary summarize(const RunRecord& record, const SummarizeOptions& opts) {
  const auto& xs = record.samples;
  if (xs.size() < 100) throw DomainError("summarize needs at least 100 samples");
  std::vector<double> s, e, t, v, steer, throttle;
  for (const auto& r : xs) {
    s.push_back(r.s);
    e.push_back(r.e_cg);
    t.push_back(r.t);
    v.push_back(r.vx);
    steer.push_back(r.delta_act);
    throttle.push_back(r.throttle);
  }
  MetricsSummary out = summarize_error(s, e, opts);
  out.steering_tv = total_variation(steer);
  out.throttle_tv = total_variation(throttle);
  if (record.meta.target_speed > 0.0) out.velocity = step_response_metrics(t, v, record.meta.target_speed);
  return out;
}

}  // namespace pathtrack
