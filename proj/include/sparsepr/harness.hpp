#pragma once

#include "sparsepr/diagnostics.hpp"
#include "sparsepr/solvers.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sparsepr {

/// Invalid or inconsistent experiment configuration (CLI exit code 1).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// File I/O failure (CLI exit code 2).
class IoError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class I0Mode {
  estimate, ///< argmax_i sum_j Y_j A_ji^2
  oracle,   ///< largest-magnitude support coordinate of the true signal
};

enum class SweepKind { single, beta, m };

struct ExperimentSpec {
  Index n = 2000;
  Index k = 5;
  Index m = 600;
  std::vector<std::uint64_t> seeds{1};
  SolverConfig solver;
  std::vector<double> beta_grid;
  std::vector<Index> m_grid;
  I0Mode i0_mode = I0Mode::estimate;
  double delta_audit = 0.01;
  std::filesystem::path output_dir = "out";
  /// rel_dist at or below which a trial counts as recovered
  double success_threshold = 1e-3;
  std::optional<double> min_component;
  double signal_scale = 1.0;
  Storage storage = Storage::dense;
  /// concurrent trials in sweeps
  int workers = 1;

  void validate(SweepKind kind = SweepKind::single) const;
};

/// Dense storage refuses instances with more than this many sensing entries.
inline constexpr double dense_entry_limit = 1e8;

/// Applies one `key = value` setting. Unknown keys and malformed values throw ConfigError.
void apply_setting(ExperimentSpec &spec, std::string_view key, std::string_view value);
/// Reads `key = value` lines; `#` starts a comment, blank lines are ignored.
ExperimentSpec parse_config(std::istream &in, ExperimentSpec spec = {});
ExperimentSpec load_config(std::filesystem::path const &path, ExperimentSpec spec = {});

struct TrialResult {
  Index n = 0, k = 0, m = 0;
  double beta = 0.0;
  std::uint64_t seed = 0;
  Index i0 = 0;
  bool i0_on_support = false;
  long steps = 0;
  StageReport stages;
  AuditReport audit;
  bool success = false;
  std::optional<std::string> failure;
  std::filesystem::path csv_path;
};

/// Generates the instance from `seed`, runs the solver and writes the trajectory CSV.
/// The instance depends only on (n, k, m, seed, min_component, signal_scale), never on
/// beta or the algorithm.
TrialResult run_single(ExperimentSpec const &spec, std::uint64_t seed);

struct SweepRow {
  Index n = 0, k = 0, m = 0;
  double beta = 0.0;
  long trials = 0;
  long successes = 0;
  double median_final_rel_dist = 0.0;
  std::optional<double> median_t1_step;
  double audit_pass_rate = 0.0;
};

struct SweepSummary {
  std::vector<SweepRow> rows;
  /// Sorted by (m, beta descending, seed).
  std::vector<TrialResult> trials;
  std::filesystem::path csv_path;
};

SweepSummary run_beta_sweep(ExperimentSpec const &spec);
SweepSummary run_m_sweep(ExperimentSpec const &spec);

/// Shortest representation that parses back to the same double.
std::string format_double(double v);

inline constexpr std::string_view trajectory_header =
  "step,algo_time,risk,rel_dist,rel_bregman,off_support_l1,min_support_ratio,norm_sq,inner_ratio";
inline constexpr std::string_view summary_header =
  "n,k,m,beta,trials,successes,median_final_rel_dist,median_t1_step,audit_pass_rate";

void write_trajectory_csv(std::ostream &out, std::span<TrajectoryRecord const> records);
void emit_csv(std::span<TrajectoryRecord const> records, std::filesystem::path const &path);
std::vector<TrajectoryRecord> read_trajectory_csv(std::istream &in);
std::vector<TrajectoryRecord> read_trajectory_csv(std::filesystem::path const &path);

void write_summary_csv(std::ostream &out, SweepSummary const &summary);
void emit_summary_csv(SweepSummary const &summary, std::filesystem::path const &path);

/// Quick invariant battery (gradient and mirror-map finite differences, Bregman forms,
/// comparison bounds, EG+- conservation). Prints one line per check.
bool run_self_checks(std::ostream &log, std::uint64_t seed = 1);

} // namespace sparsepr
