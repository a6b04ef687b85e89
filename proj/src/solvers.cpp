#include "sparsepr/solvers.hpp"

#include <cmath>
#include <stdexcept>

namespace sparsepr {

std::string_view to_string(Algorithm a)
{
  switch (a) {
  case Algorithm::md_rk4: return "md_rk4";
  case Algorithm::eg_pm: return "eg_pm";
  case Algorithm::hwf: return "hwf";
  }
  return "?";
}

std::string_view to_string(StepScale s)
{
  return s == StepScale::raw ? "raw" : "signal_cubed";
}

Algorithm parse_algorithm(std::string_view s)
{
  if (s == "md_rk4" || s == "md") return Algorithm::md_rk4;
  if (s == "eg_pm" || s == "eg") return Algorithm::eg_pm;
  if (s == "hwf") return Algorithm::hwf;
  throw std::invalid_argument("unknown algorithm '" + std::string(s) + "' (md_rk4, eg_pm, hwf)");
}

StepScale parse_step_scale(std::string_view s)
{
  if (s == "raw") return StepScale::raw;
  if (s == "signal_cubed") return StepScale::signal_cubed;
  throw std::invalid_argument("unknown step scale '" + std::string(s) + "' (raw, signal_cubed)");
}

void SolverConfig::validate() const
{
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be positive");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be positive");
  if (max_steps < 0) throw std::invalid_argument("max_steps must be nonnegative");
  if (record_every < 1) throw std::invalid_argument("record_every must be at least 1");
  if (stop_tol && !(*stop_tol > 0.0)) throw std::invalid_argument("stop_tol must be positive");
}

namespace {

double checked_theta(MeasurementSet const &meas, Index i0)
{
  if (i0 < 0 || i0 >= meas.n()) {
    throw std::out_of_range("initial coordinate " + std::to_string(i0) + " outside [0, " +
                            std::to_string(meas.n()) + ")");
  }
  double const theta = estimate_signal_size(meas);
  if (!(theta > 0.0)) {
    throw DegenerateInstanceError("all observations are zero; signal size estimate is 0");
  }
  return theta;
}

void require_factors(SolverState const &state, char const *who)
{
  if (!state.u || !state.v) {
    throw std::logic_error(std::string(who) + ": state has no u, v factors");
  }
}

SolverState apply_hwf(SolverState const &state, Vector const &g, double eta)
{
  require_factors(state, "step_hwf");
  Vector const &u = *state.u;
  Vector const &v = *state.v;
  SolverState next;
  next.u = Vector(u.size());
  next.v = Vector(v.size());
  for (Index i = 0; i < u.size(); ++i) {
    double const d = 2.0 * eta * g[i];
    if (!std::isfinite(d)) {
      throw DivergenceError("non-finite gradient at coordinate " + std::to_string(i), i);
    }
    double const fu = 1.0 - d;
    double const fv = 1.0 + d;
    if (fu <= 0.0 || fv <= 0.0) {
      throw StepSizeError("step size too large: |2 eta g_i| = " + std::to_string(std::abs(d)) +
                            " >= 1 at coordinate " + std::to_string(i),
                          i);
    }
    (*next.u)[i] = u[i] * fu;
    (*next.v)[i] = v[i] * fv;
  }
  next.x = next.u->cwiseProduct(*next.u) - next.v->cwiseProduct(*next.v);
  next.step_index = state.step_index + 1;
  next.algo_time = state.algo_time + eta;
  return next;
}

SolverState apply_egpm(SolverState const &state, Vector const &g, double eta)
{
  require_factors(state, "step_egpm");
  Vector const &u = *state.u;
  Vector const &v = *state.v;
  SolverState next;
  next.u = Vector(u.size());
  next.v = Vector(v.size());
  for (Index i = 0; i < u.size(); ++i) {
    double const e = eta * g[i];
    if (!(std::abs(e) <= 700.0)) {
      throw DivergenceError("exponent overflow: |eta g_i| = " + std::to_string(std::abs(e)) + " at coordinate " +
                              std::to_string(i),
                            i);
    }
    (*next.u)[i] = u[i] * std::exp(-e);
    (*next.v)[i] = state.factor_product ? *state.factor_product / (*next.u)[i] : v[i] * std::exp(e);
  }
  next.factor_product = state.factor_product;
  next.x = *next.u - *next.v;
  next.step_index = state.step_index + 1;
  next.algo_time = state.algo_time + eta;
  return next;
}

// Classical RK4 on dx/dt = -sqrt(x^2 + beta^2) . grad F(x); g1 is grad F at state.x.
SolverState apply_rk4(SolverState const &state, Vector const &g1, GradientFn const &grad, HypentropyMap const &map,
                      double h)
{
  if (state.u || state.v) {
    throw std::logic_error("step_md_rk4: mirror descent state must not carry u, v factors");
  }
  auto field = [&](Vector const &x, Vector const &g) -> Vector {
    return -map.inverse_hessian_diag(x).cwiseProduct(g);
  };
  Vector const &x = state.x;
  Vector const k1 = field(x, g1);
  Vector const x2 = x + 0.5 * h * k1;
  Vector const k2 = field(x2, grad(x2));
  Vector const x3 = x + 0.5 * h * k2;
  Vector const k3 = field(x3, grad(x3));
  Vector const x4 = x + h * k3;
  Vector const k4 = field(x4, grad(x4));

  SolverState next;
  next.x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  if (!next.x.allFinite()) {
    throw DivergenceError("non-finite state after RK4 step " + std::to_string(state.step_index + 1));
  }
  next.step_index = state.step_index + 1;
  next.algo_time = state.algo_time + h;
  return next;
}

GradientFn empirical(MeasurementSet const &meas, ComputeOptions const &opts)
{
  return [&meas, opts](Vector const &x) { return empirical_gradient(x, meas, opts); };
}

} // namespace

SolverState initialize_md(MeasurementSet const &meas, Index i0, double beta)
{
  HypentropyMap const check{beta};
  double const theta = checked_theta(meas, i0);
  SolverState state;
  state.x = Vector::Zero(meas.n());
  state.x[i0] = theta / std::sqrt(3.0);
  return state;
}

SolverState initialize_factored(MeasurementSet const &meas, Index i0, double beta, Algorithm algorithm)
{
  HypentropyMap const check{beta};
  if (algorithm == Algorithm::md_rk4) {
    throw std::invalid_argument("initialize_factored: md_rk4 has no factored form");
  }
  double const theta = checked_theta(meas, i0);
  Index const n = meas.n();
  double const half_beta = 0.5 * beta;
  double const a = theta / (2.0 * std::sqrt(3.0));
  double const u0 = a + std::sqrt(theta * theta / 12.0 + half_beta * half_beta);
  // (a + b)(b - a) = beta^2 / 4; dividing avoids the cancellation in b - a
  double const v0 = half_beta * half_beta / u0;

  SolverState state;
  Vector u = Vector::Constant(n, half_beta);
  Vector v = Vector::Constant(n, half_beta);
  u[i0] = u0;
  v[i0] = v0;
  if (algorithm == Algorithm::eg_pm) {
    state.x = u - v;
    state.factor_product = half_beta * half_beta;
  } else {
    u = u.cwiseSqrt();
    v = v.cwiseSqrt();
    state.x = u.cwiseProduct(u) - v.cwiseProduct(v);
  }
  state.u = std::move(u);
  state.v = std::move(v);
  return state;
}

SolverState step_hwf(SolverState const &state, MeasurementSet const &meas, double eta_eff, ComputeOptions const &opts)
{
  return apply_hwf(state, empirical_gradient(state.x, meas, opts), eta_eff);
}

SolverState step_egpm(SolverState const &state, MeasurementSet const &meas, double eta_eff, ComputeOptions const &opts)
{
  return apply_egpm(state, empirical_gradient(state.x, meas, opts), eta_eff);
}

SolverState step_md_rk4(SolverState const &state, MeasurementSet const &meas, HypentropyMap const &map, double h,
                        ComputeOptions const &opts)
{
  auto const grad = empirical(meas, opts);
  return apply_rk4(state, grad(state.x), grad, map, h);
}

SolverState step_hwf(SolverState const &state, GradientFn const &grad, double eta_eff)
{
  return apply_hwf(state, grad(state.x), eta_eff);
}

SolverState step_egpm(SolverState const &state, GradientFn const &grad, double eta_eff)
{
  return apply_egpm(state, grad(state.x), eta_eff);
}

SolverState step_md_rk4(SolverState const &state, GradientFn const &grad, HypentropyMap const &map, double h)
{
  return apply_rk4(state, grad(state.x), grad, map, h);
}

double rk4_error_estimate(SolverState const &state, GradientFn const &grad, HypentropyMap const &map, double h)
{
  SolverState const full = step_md_rk4(state, grad, map, h);
  SolverState const half = step_md_rk4(step_md_rk4(state, grad, map, 0.5 * h), grad, map, 0.5 * h);
  return (full.x - half.x).lpNorm<Eigen::Infinity>() / 15.0;
}

RunResult run(MeasurementSet const &meas, SparseSignal const *signal, SolverConfig const &config, Index i0,
              StateObserver const &observer)
{
  config.validate();
  if (signal != nullptr) {
    require_dims(signal->n(), meas.n(), "run");
  }
  HypentropyMap const map{config.beta};

  RunResult result;
  result.i0 = i0;
  result.theta_hat = checked_theta(meas, i0);
  result.eta_eff = config.step_scale == StepScale::raw ? config.eta
                                                       : config.eta / std::pow(result.theta_hat, 3);

  SolverState state = config.algorithm == Algorithm::md_rk4
                        ? initialize_md(meas, i0, config.beta)
                        : initialize_factored(meas, i0, config.beta, config.algorithm);
  auto const grad = empirical(meas, config.compute);

  for (;;) {
    RiskEvaluation const eval = evaluate(state.x, meas, config.compute);
    bool const due = state.step_index % config.record_every == 0;
    if (due && observer) {
      observer(state, eval.value);
    }
    bool done = state.step_index >= config.max_steps;
    if (!done && config.stop_tol && signal != nullptr &&
        dist(state.x, signal->values()) / signal->norm() <= *config.stop_tol) {
      result.stopped_early = true;
      done = true;
    }
    if (done) {
      if (!due && observer) {
        observer(state, eval.value);
      }
      break;
    }
    try {
      switch (config.algorithm) {
      case Algorithm::hwf: state = apply_hwf(state, eval.gradient, result.eta_eff); break;
      case Algorithm::eg_pm: state = apply_egpm(state, eval.gradient, result.eta_eff); break;
      case Algorithm::md_rk4:
        if (config.rk4_error_estimate) {
          result.max_rk4_error =
            std::max(result.max_rk4_error, rk4_error_estimate(state, grad, map, result.eta_eff));
        }
        state = apply_rk4(state, eval.gradient, grad, map, result.eta_eff);
        break;
      }
    } catch (DivergenceError const &e) {
      result.failure = DivergenceReport{state.step_index + 1, e.what(), e.coordinate()};
      if (!due && observer) {
        observer(state, eval.value);
      }
      break;
    }
  }
  result.final_state = std::move(state);
  return result;
}

} // namespace sparsepr
