#include "sparsepr/harness.hpp"
#include "sparsepr/rng.hpp"

#include <cmath>
#include <limits>
#include <ostream>

namespace sparsepr {

namespace {

Vector uniform_vector(SplitMix64 &gen, Index n, double lo, double hi)
{
  Vector v(n);
  for (Index i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * uniform01(gen);
  }
  return v;
}

// magnitudes in [lo, hi] with random signs
Vector signed_vector(SplitMix64 &gen, Index n, double lo, double hi)
{
  Vector v = uniform_vector(gen, n, lo, hi);
  for (Index i = 0; i < n; ++i) {
    if ((gen() >> 63) != 0) {
      v[i] = -v[i];
    }
  }
  return v;
}

bool report(std::ostream &log, char const *name, bool ok, double measure)
{
  log << (ok ? "[PASS] " : "[FAIL] ") << name << " (" << measure << ")\n";
  return ok;
}

} // namespace

bool run_self_checks(std::ostream &log, std::uint64_t seed)
{
  SplitMix64 gen{derive_seed(seed, Stream::signal, 0xC0FFEE)};
  bool all = true;

  {
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      auto const sig = generate_signal(12, 3, seed + static_cast<std::uint64_t>(trial));
      auto const meas = generate_measurements(sig, 30, seed + static_cast<std::uint64_t>(trial));
      Vector x = uniform_vector(gen, 12, -2.0, 2.0);
      Vector const g = empirical_gradient(x, meas);
      double const h = 1e-5;
      double err = 0.0;
      for (Index i = 0; i < x.size(); ++i) {
        Vector xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        double const fd = (empirical_risk(xp, meas) - empirical_risk(xm, meas)) / (2 * h);
        err = std::max(err, std::abs(fd - g[i]));
      }
      worst = std::max(worst, err / std::max(1.0, g.lpNorm<Eigen::Infinity>()));
    }
    all &= report(log, "empirical gradient vs central differences, rel err <= 1e-6", worst <= 1e-6, worst);
  }

  {
    double worst = 0.0;
    for (double beta : {1e-14, 1e-6, 1.0}) {
      HypentropyMap const map{beta};
      for (int trial = 0; trial < 20; ++trial) {
        Vector const x = signed_vector(gen, 6, 0.1, 3.0);
        Vector const grad = map.mirror_gradient(x);
        Vector const ihd = map.inverse_hessian_diag(x);
        double const h = 1e-5;
        for (Index i = 0; i < x.size(); ++i) {
          Vector xp = x, xm = x;
          xp[i] += h;
          xm[i] -= h;
          double const fd1 = (map.potential(xp) - map.potential(xm)) / (2 * h);
          double const fd2 = (map.mirror_gradient(xp)[i] - map.mirror_gradient(xm)[i]) / (2 * h);
          worst = std::max(worst, std::abs(fd1 - grad[i]) / std::abs(grad[i]));
          worst = std::max(worst, std::abs(fd2 - 1.0 / ihd[i]) * ihd[i]);
        }
      }
    }
    all &= report(log, "mirror map derivatives vs central differences, rel err <= 1e-7", worst <= 1e-7, worst);
  }

  {
    double worst = 0.0;
    for (double beta : {1e-14, 1e-6, 1.0}) {
      HypentropyMap const map{beta};
      for (int trial = 0; trial < 100; ++trial) {
        Vector const t = uniform_vector(gen, 8, -2.0, 2.0);
        Vector const x = uniform_vector(gen, 8, -2.0, 2.0);
        worst = std::max(worst, std::abs(bregman(map, t, x).value - bregman_definitional(map, t, x)));
      }
    }
    all &= report(log, "closed-form vs definitional Bregman divergence, abs err <= 1e-10", worst <= 1e-10, worst);
  }

  {
    long violations = 0;
    for (int trial = 0; trial < 200; ++trial) {
      auto const sig = generate_signal(10, 3, seed + 1000 + static_cast<std::uint64_t>(trial));
      HypentropyMap const map{trial % 2 == 0 ? 1e-6 : 1e-2};
      Vector x = uniform_vector(gen, 10, -1.0, 1.0);
      if (trial % 2 == 1) {
        // inside the second bound's hypothesis
        for (Index i = 0; i < 10; ++i) {
          double const t = sig.values()[i];
          x[i] = t != 0.0 ? t * (0.5 + 1.5 * uniform01(gen)) : 0.01 * x[i];
        }
      }
      auto const chk = lemma1_bounds(map, sig, x);
      violations += (chk.lower_ok ? 0 : 1) + (chk.upper_ok ? 0 : 1);
    }
    all &= report(log, "Bregman comparison bounds on 200 random pairs, zero violations", violations == 0,
                  static_cast<double>(violations));
  }

  {
    double const beta = 1e-3;
    auto const sig = generate_signal(10, 2, seed);
    auto const meas = generate_measurements(sig, 40, seed);
    SolverState s = initialize_factored(meas, sig.support().front(), beta, Algorithm::eg_pm);
    for (int step = 0; step < 1000; ++step) {
      s = step_egpm(s, meas, 0.05);
    }
    double const target = beta * beta / 4.0;
    double const drift = (s.u->cwiseProduct(*s.v).array() - target).abs().maxCoeff() / target;
    double const bound = 64.0 * std::numeric_limits<double>::epsilon();
    all &= report(log, "EG+- keeps u_i v_i = beta^2/4 over 1000 steps (relative drift)", drift <= bound, drift);
  }

  return all;
}

} // namespace sparsepr
