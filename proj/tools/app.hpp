#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wavectrl/analysis.hpp"

namespace wavectrl::app {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfigError = 2, kSolverError = 3 };

/// Parsed JSON run configuration. Unknown keys are rejected.
struct RunConfig {
  ProblemKind kind = ProblemKind::Boundary;
  DataTag example = DataTag::Ex1;
  double final_time = 2.0;
  double a = 0.1;
  double b = 0.4;
  CutoffMode chi_mode = CutoffMode::One;
  int p = 1;
  int q = 1;
  double kappa = 0.0;
  double gamma = 0.5;
  double potential = 0.0;
  std::vector<double> potential_list;  // study sweep over V; empty uses `potential`
  std::vector<std::pair<int, int>> pq_series;  // study series; empty uses (p, q)
  std::vector<int> nx_list;
  MeshPattern pattern = MeshPattern::Alternating;
  double jitter = 0.1;
  std::uint64_t seed = 20240607;
  ReferenceMode reference = ReferenceMode::Exact;
  int reference_nx = 128;
  int reference_p = 3;
  int reference_q = 3;
  std::string metric;
  std::string csv_name = "study.csv";
  std::string svg_name = "study.svg";
  std::string solution_name = "solution.txt";

  [[nodiscard]] ControlProblem problem(int p, int q, double potential) const;
  [[nodiscard]] ControlProblem problem() const { return problem(p, q, potential); }
};

/// Throws InvalidArgument on malformed JSON or schema violations.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// WAVECTRL_SEED, when set, replaces the configured seed.
void apply_environment(RunConfig& config);

struct PlotSeries {
  std::string label;
  std::vector<double> h;
  std::vector<double> e;
  std::optional<double> slope;
};

/// Log-log plot of error against h with one polyline per series and a
/// reference-slope triangle under each fitted series.
std::string render_svg(const std::vector<PlotSeries>& series, const std::string& title, const std::string& y_label);

struct Options {
  std::filesystem::path config;
  std::filesystem::path out_dir = ".";
  int threads = 1;
};

int cmd_solve(const Options& options, std::ostream& out);
int cmd_study(const Options& options, std::ostream& out);
int cmd_validate_exact(std::ostream& out);

/// {"error": kind, "message": text} on one line.
std::string error_json(const std::string& kind, const std::string& message);

}  // namespace wavectrl::app
