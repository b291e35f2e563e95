#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include "pathtrack/common.hpp"
#include "pathtrack/harness.hpp"
#include "pathtrack/plot.hpp"
#include "pathtrack/repro.hpp"

namespace fs = std::filesystem;
using namespace pathtrack;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kDiverged = 2;

unsigned default_jobs() { return std::max(1u, std::thread::hardware_concurrency()); }

void print_row(const SweepRow& row) {
  std::printf("%-44s %-9s", row.config.name.c_str(), to_string(row.record.termination).c_str());
  if (row.summarized) {
    std::printf(" peak %.3f  steady %.3f  rms %.3f", row.summary.peak, row.summary.steady_state,
                row.summary.rms);
  }
  if (!row.record.message.empty()) std::printf("  (%s)", row.record.message.c_str());
  std::printf("\n");
}

int cmd_run(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed) {
  ScenarioConfig cfg = load_scenario(config);
  if (seed) cfg.seed = *seed;
  SweepOptions opts;
  opts.out_dir = out;
  const auto rows = run_many({cfg}, opts);
  print_row(rows.front());
  if (rows.front().record.termination == Termination::Failed) return kUsage;
  return rows.front().record.diverged() ? kDiverged : kOk;
}

int cmd_sweep(const std::string& config, const std::string& out, unsigned jobs) {
  const SweepSpec spec = load_sweep(config);
  SweepOptions opts;
  opts.out_dir = out;
  opts.jobs = jobs;
  const auto rows = run_sweep(spec, opts);
  bool diverged = false;
  for (const auto& row : rows) {
    print_row(row);
    diverged = diverged || row.record.diverged();
  }
  std::printf("%zu runs, summary in %s\n", rows.size(), (fs::path(out) / "summary.csv").c_str());
  return diverged ? kDiverged : kOk;
}

int cmd_plot(const std::string& kind, const std::string& out, const std::vector<std::string>& csvs,
             bool abs_error, const std::string& title) {
  const PlotKind k = parse_plot_kind(kind);
  std::vector<std::vector<RunSample>> runs;
  std::vector<std::string> labels;
  for (const auto& path : csvs) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path);
    runs.push_back(read_run_csv(in));
    if (runs.back().empty()) throw ConfigError(path + " has no samples");
    labels.push_back(fs::path(path).stem().string());
  }
  std::ofstream svg(out);
  if (!svg) throw ConfigError("cannot write " + out);
  svg << emit_plot(runs, labels, k, abs_error, title);
  return kOk;
}

int cmd_course(const std::string& config, const std::string& out) {
  const ScenarioConfig cfg = load_scenario(config);
  std::ofstream csv(out);
  if (!csv) throw ConfigError("cannot write " + out);
  write_course_csv(csv, build_course(cfg.course));
  return kOk;
}

int cmd_repro(const std::string& figure, const std::string& out, unsigned jobs) {
  ReproOptions opts;
  opts.out_dir = out;
  opts.jobs = jobs;
  const ReproResult res = reproduce(figure, opts);
  for (const auto& line : res.lines) std::printf("%s\n", line.c_str());
  std::printf("%zu files written under %s\n", res.files.size(), (fs::path(out) / figure).c_str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic path-tracking lab for Ackermann vehicles"};
  app.require_subcommand(1);

  std::string config, out, kind, figure, title;
  std::optional<std::uint64_t> seed;
  unsigned jobs = default_jobs();
  std::vector<std::string> csvs;
  bool abs_error = false;

  auto* run = app.add_subcommand("run", "Run one scenario and write its CSV");
  run->add_option("--config", config, "Scenario TOML")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory")->required();
  run->add_option("--seed", seed, "Override the scenario seed");

  auto* sweep = app.add_subcommand("sweep", "Run a controller x course x speed sweep");
  sweep->add_option("--config", config, "Sweep TOML")->required()->check(CLI::ExistingFile);
  sweep->add_option("--out", out, "Output directory")->required();
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* plot = app.add_subcommand("plot", "Render run CSVs to SVG");
  plot->add_option("--kind", kind, "error_vs_distance | velocity_vs_time | trajectory")
      ->required()
      ->check(CLI::IsMember({"error_vs_distance", "velocity_vs_time", "trajectory"}));
  plot->add_option("--out", out, "SVG file")->required();
  plot->add_option("csv", csvs, "Run CSV files")->required()->check(CLI::ExistingFile);
  plot->add_flag("--abs", abs_error, "Plot |e| instead of signed e");
  plot->add_option("--title", title, "Plot title");

  auto* repro = app.add_subcommand("repro", "Regenerate a figure's data and plots");
  repro->add_option("--figure", figure, "Figure preset")->required()->check(CLI::IsMember(repro_figures()));
  repro->add_option("--out", out, "Output directory")->default_val("repro");
  repro->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

  auto* course = app.add_subcommand("course", "Write the course of a scenario as CSV");
  course->add_option("--config", config, "Scenario TOML")->required()->check(CLI::ExistingFile);
  course->add_option("--out", out, "Course CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(config, out, seed);
    if (*sweep) return cmd_sweep(config, out, jobs);
    if (*plot) return cmd_plot(kind, out, csvs, abs_error, title);
    if (*repro) return cmd_repro(figure, out, jobs);
    if (*course) return cmd_course(config, out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  }
  return kUsage;
}
