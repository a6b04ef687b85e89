#pragma once

#include "sparsepr/geometry.hpp"
#include "sparsepr/problem.hpp"
#include "sparsepr/solvers.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sparsepr {

struct TrajectoryRecord {
  long step_index = 0;
  double algo_time = 0.0;
  double risk = 0.0;
  /// dist(x, x*) / ||x*||
  double rel_dist = 0.0;
  /// dist_Phi(x*, x) / ||x*||
  double rel_bregman = 0.0;
  /// ||x_{S^c}||_1
  double off_support_l1 = 0.0;
  /// min_{i in S} |x_i| / |x*_i|
  double min_support_ratio = 0.0;
  /// ||x||^2
  double norm_sq = 0.0;
  /// 2 sqrt(3) |x . x*| - (3 ||x||^2 - ||x*||^2)
  double inner_ratio = 0.0;

  bool operator==(TrajectoryRecord const &) const = default;
};

TrajectoryRecord record(SolverState const &state, SparseSignal const &signal, MeasurementSet const &meas,
                        HypentropyMap const &map);
/// Same, with the empirical risk already known.
TrajectoryRecord record(SolverState const &state, SparseSignal const &signal, HypentropyMap const &map, double risk);

struct StageReport {
  std::optional<long> t1_step;
  std::optional<long> t2_step;
  /// Least-squares slope of log(rel_bregman) per step over [t1, t2 or end].
  std::optional<double> linear_rate;
  double final_rel_dist = 0.0;
  double max_off_support_l1 = 0.0;
  std::optional<long> warmup_drop_count;
};

/// Stage boundaries at recording resolution:
///   t1 = first record with min_support_ratio > 1/2,
///   t2 = first record with rel_bregman <= 2 delta.
/// linear_rate needs at least 10 records in its window. Plateaus (relative change of
/// rel_dist below 1% across 50 records) before t1 are grouped into segments, and drops
/// by a factor of 2 or more between consecutive segments are counted.
StageReport detect_stages(std::span<TrajectoryRecord const> trajectory, double delta);

struct ClaimResult {
  bool passed = true;
  std::optional<long> first_violation_step;
  long checked = 0;
};

struct AuditReport {
  ClaimResult off_support;  ///< ||x_{S^c}||_1 <= delta ||x*|| up to t2
  ClaimResult norm_window;  ///< (1/3 - 3 sqrt(log n / m)) ||x*||^2 <= ||x||^2 <= 2 ||x*||^2
  ClaimResult inner_ratio;  ///< inner_ratio >= -1e-9 ||x*||^2
  bool all_passed() const { return off_support.passed && norm_window.passed && inner_ratio.passed; }
};

/// Violations are reported, not thrown: the bounds hold with high probability only.
AuditReport audit_theorem_invariants(std::span<TrajectoryRecord const> trajectory, SparseSignal const &signal,
                                     Index m, double delta);

/// min_i xi x_i x*_i with xi = sign(x_end . x*). Nonnegative when no coordinate has
/// the wrong sign relative to the recovered global sign.
double min_aligned_product(Vector const &x, SparseSignal const &signal, int xi);
int global_sign(Vector const &x_end, SparseSignal const &signal);

struct RecordedRun {
  RunResult result;
  std::vector<TrajectoryRecord> trajectory;
};

/// run() with every observed state turned into a TrajectoryRecord.
RecordedRun run_recorded(MeasurementSet const &meas, SparseSignal const &signal, SolverConfig const &config, Index i0);

} // namespace sparsepr
