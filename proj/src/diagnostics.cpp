#include "sparsepr/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sparsepr {

TrajectoryRecord record(SolverState const &state, SparseSignal const &signal, HypentropyMap const &map, double risk)
{
  Vector const &x = state.x;
  Vector const &xs = signal.values();
  require_dims(x.size(), signal.n(), "record");

  TrajectoryRecord r;
  r.step_index = state.step_index;
  r.algo_time = state.algo_time;
  r.risk = risk;
  r.rel_dist = dist(x, xs) / signal.norm();
  r.rel_bregman = dist_bregman(map, x, xs) / signal.norm();
  r.off_support_l1 = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (xs[i] == 0.0) {
      r.off_support_l1 += std::abs(x[i]);
    }
  }
  r.min_support_ratio = std::numeric_limits<double>::infinity();
  for (Index i : signal.support()) {
    r.min_support_ratio = std::min(r.min_support_ratio, std::abs(x[i]) / std::abs(xs[i]));
  }
  r.norm_sq = x.squaredNorm();
  r.inner_ratio = 2.0 * std::sqrt(3.0) * std::abs(x.dot(xs)) - (3.0 * r.norm_sq - xs.squaredNorm());
  return r;
}

TrajectoryRecord record(SolverState const &state, SparseSignal const &signal, MeasurementSet const &meas,
                        HypentropyMap const &map)
{
  return record(state, signal, map, empirical_risk(state.x, meas));
}

namespace {

std::optional<long> count_warmup_drops(std::span<TrajectoryRecord const> warmup)
{
  constexpr std::size_t window = 50;
  if (warmup.size() <= window) {
    return std::nullopt;
  }
  std::size_t const last = warmup.size() - window;
  std::vector<double> levels; // rel_dist at the start of each plateau segment
  bool inside = false;
  for (std::size_t r = 0; r < last; ++r) {
    double const a = warmup[r].rel_dist;
    double const b = warmup[r + window].rel_dist;
    bool const flat = std::abs(b - a) < 0.01 * a;
    if (flat && !inside) {
      levels.push_back(a);
    }
    inside = flat;
  }
  long drops = 0;
  for (std::size_t s = 1; s < levels.size(); ++s) {
    if (levels[s] <= 0.5 * levels[s - 1]) {
      ++drops;
    }
  }
  return drops;
}

} // namespace

StageReport detect_stages(std::span<TrajectoryRecord const> trajectory, double delta)
{
  StageReport rep;
  if (trajectory.empty()) {
    return rep;
  }
  rep.final_rel_dist = trajectory.back().rel_dist;
  for (auto const &r : trajectory) {
    rep.max_off_support_l1 = std::max(rep.max_off_support_l1, r.off_support_l1);
  }

  std::size_t t1_idx = trajectory.size();
  for (std::size_t i = 0; i < trajectory.size(); ++i) {
    if (trajectory[i].min_support_ratio > 0.5) {
      t1_idx = i;
      rep.t1_step = trajectory[i].step_index;
      break;
    }
  }
  // t2 is searched from t1 on, so t1 <= t2 whenever both exist
  std::size_t const t2_from = rep.t1_step ? t1_idx : 0;
  std::size_t t2_idx = trajectory.size();
  for (std::size_t i = t2_from; i < trajectory.size(); ++i) {
    if (trajectory[i].rel_bregman <= 2.0 * delta) {
      t2_idx = i;
      rep.t2_step = trajectory[i].step_index;
      break;
    }
  }

  if (rep.t1_step) {
    std::size_t const end = rep.t2_step ? t2_idx + 1 : trajectory.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long count = 0;
    for (std::size_t i = t1_idx; i < end; ++i) {
      double const b = trajectory[i].rel_bregman;
      if (!(b > 0.0)) {
        continue;
      }
      double const t = static_cast<double>(trajectory[i].step_index);
      double const y = std::log(b);
      sx += t;
      sy += y;
      sxx += t * t;
      sxy += t * y;
      ++count;
    }
    if (count >= 10) {
      double const c = static_cast<double>(count);
      double const denom = c * sxx - sx * sx;
      if (denom > 0.0) {
        rep.linear_rate = (c * sxy - sx * sy) / denom;
      }
    }
  }

  rep.warmup_drop_count = count_warmup_drops(trajectory.first(t1_idx));
  return rep;
}

AuditReport audit_theorem_invariants(std::span<TrajectoryRecord const> trajectory, SparseSignal const &signal,
                                     Index m, double delta)
{
  AuditReport rep;
  if (trajectory.empty()) {
    return rep;
  }
  double const norm = signal.norm();
  double const norm_sq = norm * norm;
  auto const violate = [](ClaimResult &c, long step) {
    if (c.passed) {
      c.passed = false;
      c.first_violation_step = step;
    }
  };

  StageReport const stages = detect_stages(trajectory, delta);
  for (auto const &r : trajectory) {
    if (stages.t2_step && r.step_index > *stages.t2_step) {
      break;
    }
    ++rep.off_support.checked;
    if (r.off_support_l1 > delta * norm) {
      violate(rep.off_support, r.step_index);
    }
  }

  double const n = static_cast<double>(signal.n());
  double const lower = (1.0 / 3.0 - 3.0 * std::sqrt(std::log(n) / static_cast<double>(m))) * norm_sq;
  double const upper = 2.0 * norm_sq;
  bool entered = false;
  for (auto const &r : trajectory) {
    bool const inside = r.norm_sq >= lower && r.norm_sq <= upper;
    entered = entered || inside;
    if (!entered) {
      continue;
    }
    ++rep.norm_window.checked;
    if (!inside) {
      violate(rep.norm_window, r.step_index);
    }
    ++rep.inner_ratio.checked;
    if (r.inner_ratio < -1e-9 * norm_sq) {
      violate(rep.inner_ratio, r.step_index);
    }
  }
  return rep;
}

int global_sign(Vector const &x_end, SparseSignal const &signal)
{
  return x_end.dot(signal.values()) >= 0.0 ? 1 : -1;
}

double min_aligned_product(Vector const &x, SparseSignal const &signal, int xi)
{
  require_dims(x.size(), signal.n(), "min_aligned_product");
  return (static_cast<double>(xi) * x.cwiseProduct(signal.values())).minCoeff();
}

RecordedRun run_recorded(MeasurementSet const &meas, SparseSignal const &signal, SolverConfig const &config, Index i0)
{
  RecordedRun out;
  HypentropyMap const map{config.beta};
  out.result = run(meas, &signal, config, i0, [&](SolverState const &s, double risk) {
    out.trajectory.push_back(record(s, signal, map, risk));
  });
  return out;
}

} // namespace sparsepr
