#pragma once

#include "sparsepr/problem.hpp"

#include <optional>

namespace sparsepr {

// Hypentropy mirror map
//   Phi(x) = sum_i x_i asinh(x_i / beta) - sqrt(x_i^2 + beta^2),   beta > 0.
// Its Hessian is diagonal with entries (x_i^2 + beta^2)^(-1/2).
class HypentropyMap {
public:
  explicit HypentropyMap(double beta);

  double beta() const { return beta_; }

  double potential(Vector const &x) const;
  /// asinh(x_i / beta)
  Vector mirror_gradient(Vector const &x) const;
  /// sqrt(x_i^2 + beta^2)
  Vector inverse_hessian_diag(Vector const &x) const;

  /// log(z + sqrt(z^2 + beta^2)); negative z goes through
  /// z + sqrt(z^2 + beta^2) = beta^2 / (sqrt(z^2 + beta^2) - z) to avoid cancellation.
  double log_shifted(double z) const;

private:
  double beta_;
};

struct BregmanResult {
  double value = 0.0;
  std::optional<Vector> per_coordinate;
};

/// D_Phi(target, x) from the per-coordinate closed form
///   g_i = sqrt(x_i^2+b^2) - sqrt(t_i^2+b^2) - t_i log[(x_i + sqrt(x_i^2+b^2)) / (t_i + sqrt(t_i^2+b^2))].
/// Each g_i is clamped at zero against rounding.
BregmanResult bregman(HypentropyMap const &map, Vector const &target, Vector const &x, bool want_breakdown = false);

/// Phi(target) - Phi(x) - grad Phi(x) . (target - x). Only for cross-checking the closed form.
double bregman_definitional(HypentropyMap const &map, Vector const &target, Vector const &x);

/// min(||x - target||, ||x + target||)
double dist(Vector const &x, Vector const &target);

/// min(D_Phi(target, x), D_Phi(-target, x))
double dist_bregman(HypentropyMap const &map, Vector const &x, Vector const &target);

struct Lemma1Check {
  bool lower_ok = false;
  bool upper_applicable = false;
  bool upper_ok = false;
  double lower_lhs = 0.0, lower_rhs = 0.0;
  double upper_lhs = 0.0, upper_rhs = 0.0;
};

/// Checks the two comparison bounds between D_Phi(x*, x) and Euclidean distances:
///   ||x - x*||^2 <= 2 sqrt(max(||x||_inf^2, ||x*||_inf^2) + beta^2) D_Phi(x*, x)
/// and, when x_i x*_i >= 0 and |x_i| >= |x*_i| / 2 for all i,
///   D_Phi(x*, x) <= sqrt(k) / (c ||x*||) ||x_S - x*_S||^2 + ||x_{S^c}||_1,  c = x*_min sqrt(k).
Lemma1Check lemma1_bounds(HypentropyMap const &map, SparseSignal const &target, Vector const &x);

} // namespace sparsepr
