#include "sparsepr/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sparsepr {

HypentropyMap::HypentropyMap(double beta)
  : beta_{beta}
{
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("HypentropyMap: beta must be positive and finite, got " + std::to_string(beta));
  }
}

double HypentropyMap::potential(Vector const &x) const
{
  double sum = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    sum += x[i] * std::asinh(x[i] / beta_) - std::hypot(x[i], beta_);
  }
  return sum;
}

Vector HypentropyMap::mirror_gradient(Vector const &x) const
{
  return x.unaryExpr([b = beta_](double v) { return std::asinh(v / b); });
}

Vector HypentropyMap::inverse_hessian_diag(Vector const &x) const
{
  return x.unaryExpr([b = beta_](double v) { return std::hypot(v, b); });
}

double HypentropyMap::log_shifted(double z) const
{
  double const s = std::hypot(z, beta_);
  if (z >= 0.0) {
    return std::log(z + s);
  }
  return 2.0 * std::log(beta_) - std::log(s - z);
}

namespace {

double bregman_coordinate(HypentropyMap const &map, double t, double x)
{
  if (t == x) {
    return 0.0;
  }
  // g is even under (t, x) -> (-t, -x); work with t >= 0
  if (t < 0.0 || (t == 0.0 && x < 0.0)) {
    t = -t;
    x = -x;
  }
  double const b = map.beta();
  double const st = std::hypot(t, b);
  double const sx = std::hypot(x, b);
  double const ds = (x - t) * (x + t) / (sx + st);
  double log_ratio;
  if (x >= 0.0) {
    // (x + sx) / (t + st) = 1 + ((x - t) + (sx - st)) / (t + st)
    log_ratio = std::log1p(((x - t) + ds) / (t + st));
  } else {
    log_ratio = map.log_shifted(x) - map.log_shifted(t);
  }
  return std::max(0.0, ds - t * log_ratio);
}

} // namespace

BregmanResult bregman(HypentropyMap const &map, Vector const &target, Vector const &x, bool want_breakdown)
{
  require_dims(x.size(), target.size(), "bregman");
  BregmanResult out;
  if (want_breakdown) {
    out.per_coordinate = Vector(x.size());
  }
  for (Index i = 0; i < x.size(); ++i) {
    double const g = bregman_coordinate(map, target[i], x[i]);
    if (want_breakdown) {
      (*out.per_coordinate)[i] = g;
    }
    out.value += g;
  }
  return out;
}

double bregman_definitional(HypentropyMap const &map, Vector const &target, Vector const &x)
{
  require_dims(x.size(), target.size(), "bregman_definitional");
  return map.potential(target) - map.potential(x) - map.mirror_gradient(x).dot(target - x);
}

double dist(Vector const &x, Vector const &target)
{
  require_dims(x.size(), target.size(), "dist");
  return std::min((x - target).norm(), (x + target).norm());
}

double dist_bregman(HypentropyMap const &map, Vector const &x, Vector const &target)
{
  require_dims(x.size(), target.size(), "dist_bregman");
  return std::min(bregman(map, target, x).value, bregman(map, -target, x).value);
}

Lemma1Check lemma1_bounds(HypentropyMap const &map, SparseSignal const &target, Vector const &x)
{
  require_dims(x.size(), target.n(), "lemma1_bounds");
  Vector const &xs = target.values();
  double const breg = bregman(map, xs, x).value;
  double const beta = map.beta();

  Lemma1Check out;
  double const peak = std::max(x.cwiseAbs().maxCoeff(), xs.cwiseAbs().maxCoeff());
  out.lower_lhs = (x - xs).squaredNorm();
  out.lower_rhs = 2.0 * std::sqrt(peak * peak + beta * beta) * breg;
  // rounding slack: both sides carry O(eps) relative error
  out.lower_ok = out.lower_lhs <= out.lower_rhs * (1.0 + 1e-10) + 1e-15;

  out.upper_applicable = true;
  for (Index i = 0; i < x.size(); ++i) {
    if (x[i] * xs[i] < 0.0 || std::abs(x[i]) < 0.5 * std::abs(xs[i])) {
      out.upper_applicable = false;
      break;
    }
  }
  double on_support_sq = 0.0;
  double off_support_l1 = 0.0;
  for (Index i = 0; i < x.size(); ++i) {
    if (xs[i] != 0.0) {
      on_support_sq += (x[i] - xs[i]) * (x[i] - xs[i]);
    } else {
      off_support_l1 += std::abs(x[i]);
    }
  }
  double const c = target.min_component() * std::sqrt(static_cast<double>(target.k()));
  out.upper_lhs = breg;
  out.upper_rhs = std::sqrt(static_cast<double>(target.k())) / (c * target.norm()) * on_support_sq + off_support_l1;
  out.upper_ok = !out.upper_applicable || out.upper_lhs <= out.upper_rhs * (1.0 + 1e-10) + 1e-15;
  return out;
}

} // namespace sparsepr
