#include <doctest.h>

#include "oracles.hpp"
#include "sparsepr/geometry.hpp"
#include "sparsepr/solvers.hpp"

#include <cmath>

using namespace sparsepr;
using doctest::Approx;

namespace {

Vector vec(std::initializer_list<double> values)
{
  Vector v(static_cast<Index>(values.size()));
  Index i = 0;
  for (double x : values) {
    v[i++] = x;
  }
  return v;
}

// sum_i g_i in long double straight from the closed form, no rearrangement
double bregman_long(double beta, Vector const &t, Vector const &x)
{
  long double sum = 0;
  long double const b = beta;
  for (Index i = 0; i < t.size(); ++i) {
    long double const ti = t[i], xi = x[i];
    long double const st = std::sqrt(ti * ti + b * b), sx = std::sqrt(xi * xi + b * b);
    sum += sx - st - ti * (std::asinh(xi / b) - std::asinh(ti / b));
  }
  return static_cast<double>(sum);
}

} // namespace

TEST_CASE("map rejects bad beta")
{
  CHECK_THROWS_AS(HypentropyMap{0.0}, std::invalid_argument);
  CHECK_THROWS_AS(HypentropyMap{-1.0}, std::invalid_argument);
  CHECK_THROWS_AS(HypentropyMap{std::nan("")}, std::invalid_argument);
}

TEST_CASE("potential and derivatives by hand")
{
  HypentropyMap const unit{1.0};
  CHECK(unit.potential(vec({0.0})) == -1.0);
  CHECK(unit.potential(vec({0.0, 0.0, 0.0})) == -3.0);
  CHECK(unit.mirror_gradient(vec({1.0}))[0] == Approx(std::log(1.0 + std::sqrt(2.0))).epsilon(1e-15));
  CHECK(unit.inverse_hessian_diag(vec({0.0}))[0] == 1.0);
  CHECK(unit.inverse_hessian_diag(vec({3.0}))[0] == Approx(std::sqrt(10.0)).epsilon(1e-15));

  HypentropyMap const tiny{1e-14};
  CHECK(tiny.potential(vec({0.0})) == -1e-14);
  CHECK(tiny.inverse_hessian_diag(vec({1.0}))[0] == Approx(1.0).epsilon(1e-15));
  // asinh(1e14) = log(2e14) + O(1e-28)
  CHECK(tiny.mirror_gradient(vec({1.0}))[0] == Approx(std::log(2e14)).epsilon(1e-15));
  CHECK(tiny.mirror_gradient(vec({-1.0}))[0] == Approx(-std::log(2e14)).epsilon(1e-15));
}

TEST_CASE("log_shifted is accurate for negative arguments")
{
  HypentropyMap const map{1e-14};
  // log(z + sqrt(z^2 + b^2)) = asinh(z / b) + log(b)
  for (double z : {-1.0, -1e-3, -1e-14, 0.0, 1e-14, 1.0}) {
    double const want = std::asinh(z / 1e-14) + std::log(1e-14);
    CHECK(map.log_shifted(z) == Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("mirror map derivatives agree with finite differences")
{
  SplitMix64 gen{2};
  for (double beta : {1e-14, 1e-6, 1.0}) {
    HypentropyMap const map{beta};
    for (int t = 0; t < 50; ++t) {
      Vector x = oracle::uniform(gen, 4, 0.1, 3.0);
      for (Index i = 0; i < 4; ++i) {
        if (uniform01(gen) < 0.5) {
          x[i] = -x[i];
        }
      }
      Vector const fd = oracle::central_difference([&](Vector const &z) { return map.potential(z); }, x, 1e-6);
      CHECK(oracle::relative_inf_error(map.mirror_gradient(x), fd) <= 1e-7);
      for (Index i = 0; i < 4; ++i) {
        double const h = 1e-6 * std::abs(x[i]);
        Vector p = x, q = x;
        p[i] += h;
        q[i] -= h;
        double const d2 = (map.mirror_gradient(p)[i] - map.mirror_gradient(q)[i]) / (2.0 * h);
        double const want = 1.0 / map.inverse_hessian_diag(x)[i];
        CHECK(std::abs(d2 - want) <= 1e-7 * want);
      }
    }
  }
}

TEST_CASE("bregman examples")
{
  HypentropyMap const unit{1.0};
  CHECK(bregman(unit, vec({1.0}), vec({0.0})).value ==
        Approx(1.0 - std::sqrt(2.0) + std::log(1.0 + std::sqrt(2.0))).epsilon(1e-14));
  CHECK(bregman(unit, vec({1.0}), vec({0.0})).value == Approx(0.46716).epsilon(1e-5));
  Vector const t = vec({0.5, -2.0, 0.0});
  CHECK(bregman(unit, t, t).value == 0.0);

  auto const with = bregman(unit, t, vec({1.0, 1.0, 1.0}), true);
  REQUIRE(with.per_coordinate);
  CHECK(with.per_coordinate->sum() == Approx(with.value).epsilon(1e-15));
  CHECK_FALSE(bregman(unit, t, t).per_coordinate);
  CHECK_THROWS_AS(bregman(unit, t, vec({1.0})), DimensionError);
}

TEST_CASE("bregman at initialization is bounded by ||x*||_1 log(1/beta) + 1")
{
  for (double beta : {1e-6, 1e-10, 1e-14}) {
    HypentropyMap const map{beta};
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      auto const s = generate_signal(200, 5, seed);
      // the bound is stated for x*_i0 > 0; fix the global sign accordingly
      Index i0 = s.support().front();
      for (Index i : s.support()) {
        if (std::abs(s.values()[i]) > std::abs(s.values()[i0])) {
          i0 = i;
        }
      }
      Vector const target = s.values()[i0] > 0.0 ? s.values() : (-s.values()).eval();
      // x(0) with exact theta_hat = 1
      Vector x = Vector::Zero(200);
      x[i0] = 1.0 / std::sqrt(3.0);
      double const d = bregman(map, target, x).value;
      CHECK(d <= s.values().lpNorm<1>() * std::log(1.0 / beta) + 1.0);
    }
  }
}

TEST_CASE("closed form matches the definition and a long double evaluation")
{
  SplitMix64 gen{3};
  for (double beta : {1e-14, 1e-6, 1.0}) {
    HypentropyMap const map{beta};
    for (int t = 0; t < 300; ++t) {
      Vector const a = oracle::uniform(gen, 6, -2.0, 2.0);
      Vector const b = oracle::uniform(gen, 6, -2.0, 2.0);
      double const closed = bregman(map, a, b).value;
      CHECK(std::abs(closed - bregman_definitional(map, a, b)) <= 1e-10);
      CHECK(std::abs(closed - bregman_long(beta, a, b)) <= 1e-12 * std::max(1.0, closed));
    }
  }
}

TEST_CASE("closed form keeps precision when the target is negative and beta is tiny")
{
  // t < 0, x < 0 close to t: g ~ (x - t)^2 / (2 |t|)
  HypentropyMap const map{1e-14};
  double const t = -0.7, x = -0.7 + 1e-6;
  double const want = (x - t) * (x - t) / (2.0 * 0.7);
  CHECK(bregman(map, vec({t}), vec({x})).value == Approx(want).epsilon(1e-5));
  // the naive quotient log((x + sx) / (t + st)) has both terms cancelling to ~1e-28
  CHECK(bregman(map, vec({t}), vec({x})).value == Approx(bregman(map, vec({-t}), vec({-x})).value).epsilon(1e-12));
}

TEST_CASE("nonnegativity, identity and sign symmetry")
{
  SplitMix64 gen{4};
  for (double beta : {1e-14, 1e-6, 1.0}) {
    HypentropyMap const map{beta};
    for (int t = 0; t < 300; ++t) {
      Vector const a = oracle::uniform(gen, 5, -10.0, 10.0);
      Vector const b = oracle::uniform(gen, 5, -10.0, 10.0);
      CHECK(bregman(map, a, b).value >= 0.0);
      CHECK(bregman(map, a, a).value <= 1e-12);
      CHECK(bregman(map, (-a).eval(), (-b).eval()).value == bregman(map, a, b).value);
      CHECK(map.potential(-a) == map.potential(a));
    }
  }
}

TEST_CASE("dist examples")
{
  Vector const t = vec({3.0, -4.0});
  CHECK(dist(-t, t) == 0.0);
  CHECK(dist(Vector::Zero(2), t) == 5.0);
  CHECK(dist(vec({1.0, 0.0}), vec({0.0, 1.0})) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(dist(vec({1.0}), t), DimensionError);
}

TEST_CASE("dist_bregman examples")
{
  HypentropyMap const map{1e-6};
  Vector const t = vec({0.3, 0.0, -0.9});
  CHECK(dist_bregman(map, t, t) == 0.0);
  CHECK(dist_bregman(map, (-t).eval(), t) == 0.0);
  SplitMix64 gen{5};
  for (int i = 0; i < 50; ++i) {
    Vector const x = oracle::uniform(gen, 3, -1.0, 1.0);
    CHECK(dist_bregman(map, x, t) <= bregman(map, t, x).value);
  }
  CHECK_THROWS_AS(dist_bregman(map, vec({1.0}), t), DimensionError);
}

TEST_CASE("comparison bounds")
{
  HypentropyMap const map{1e-6};
  auto const s = generate_signal(30, 4, 6);

  auto const at = lemma1_bounds(map, s, s.values());
  CHECK(at.lower_ok);
  CHECK(at.upper_applicable);
  CHECK(at.upper_ok);

  Vector flipped = s.values();
  flipped[s.support().front()] *= -1.0;
  CHECK_FALSE(lemma1_bounds(map, s, flipped).upper_applicable);
  CHECK(lemma1_bounds(map, s, flipped).upper_ok);
  CHECK_THROWS_AS(lemma1_bounds(map, s, Vector::Zero(5)), DimensionError);

  // random points inside the hypothesis region: |x_i| in [|x*_i| / 2, 2 |x*_i|] on S, small off S
  SplitMix64 gen{6};
  int applicable = 0;
  for (int t = 0; t < 500; ++t) {
    double const beta = t % 3 == 0 ? 1e-14 : (t % 3 == 1 ? 1e-6 : 1.0);
    HypentropyMap const m{beta};
    auto const sig = generate_signal(12, 1 + t % 5, 500 + static_cast<std::uint64_t>(t));
    Vector x = oracle::uniform(gen, 12, -0.05, 0.05);
    for (Index i : sig.support()) {
      x[i] = sig.values()[i] * (0.5 + 1.5 * uniform01(gen));
    }
    auto const c = lemma1_bounds(m, sig, x);
    CHECK(c.lower_ok);
    CHECK(c.upper_ok);
    applicable += c.upper_applicable ? 1 : 0;
  }
  CHECK(applicable == 500);
}
