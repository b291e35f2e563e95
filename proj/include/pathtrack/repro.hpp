#pragma once

#include <string>
#include <vector>

#include "pathtrack/config.hpp"

namespace pathtrack {

/// Names accepted by reproduce(): fig6, fig8 ... fig15 and loop.
const std::vector<std::string>& repro_figures();

/// Lateral-tracking presets (fig10 to fig15) as sweeps. fig10 returns the
/// offset-convergence sweep; its feedforward comparison is added by reproduce().
SweepSpec figure_sweep(const std::string& figure);

struct ReproOptions {
  std::string out_dir = "repro";
  unsigned jobs = 1;
};

struct ReproResult {
  std::vector<std::string> files;  // written paths, relative to out_dir
  std::vector<std::string> lines;  // human-readable summary
};

/// Regenerates one figure's data (CSV) and plots (SVG) under out_dir/<figure>.
/// Throws ConfigError for an unknown figure name.
ReproResult reproduce(const std::string& figure, const ReproOptions& opts);

}  // namespace pathtrack
