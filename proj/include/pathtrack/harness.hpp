#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "pathtrack/config.hpp"
#include "pathtrack/metrics.hpp"

namespace pathtrack {

/// Closed-loop simulation of one scenario. Never throws for run-time
/// failures of the controllers; they end the record with Termination::Failed.
RunRecord run_scenario(const ScenarioConfig& cfg);
RunRecord run_scenario(const ScenarioConfig& cfg, const Course& course);

/// Column order: t, s, x, y, theta, v_x, v_y, omega_z, delta_cmd, delta_act,
/// throttle, e_cg, e_fa, theta_e, then diagnostics.
void write_run_csv(std::ostream& out, const RunRecord& record);
std::vector<RunSample> read_run_csv(std::istream& in);

struct SweepRow {
  ScenarioConfig config;
  RunRecord record;  // samples are dropped after writing unless kept
  MetricsSummary summary;
  bool summarized = false;
  std::size_t sample_count = 0;
};

void write_summary_header(std::ostream& out);
void write_summary_row(std::ostream& out, const SweepRow& row);

/// All scenarios of a sweep in deterministic order with unique names.
std::vector<ScenarioConfig> expand_sweep(const SweepSpec& spec);

struct SweepOptions {
  unsigned jobs = 1;
  std::string out_dir;     // per-run CSVs and summary.csv; empty = none
  bool keep_samples = false;
};

/// Runs every scenario; the returned rows are sorted by scenario name.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const SweepOptions& opts);
std::vector<SweepRow> run_many(const std::vector<ScenarioConfig>& configs, const SweepOptions& opts);

}  // namespace pathtrack
