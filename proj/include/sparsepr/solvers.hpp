#pragma once

#include "sparsepr/geometry.hpp"
#include "sparsepr/problem.hpp"

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sparsepr {

enum class Algorithm {
  md_rk4, ///< mirror descent flow integrated with classical RK4
  eg_pm,  ///< exponentiated gradient with positive and negative weights, x = u - v
  hwf,    ///< Hadamard Wirtinger flow, x = u.u - v.v
};

enum class StepScale {
  raw,          ///< eta used as given
  signal_cubed, ///< eta / theta_hat^3
};

std::string_view to_string(Algorithm a);
std::string_view to_string(StepScale s);
Algorithm parse_algorithm(std::string_view s);
StepScale parse_step_scale(std::string_view s);

struct SolverConfig {
  double beta = 1e-10;
  /// Step size; for md_rk4 this is the integration step h.
  double eta = 0.1;
  long max_steps = 1000;
  Algorithm algorithm = Algorithm::hwf;
  StepScale step_scale = StepScale::raw;
  /// Stop once dist(x, x*) / ||x*|| <= stop_tol (needs the true signal).
  std::optional<double> stop_tol;
  long record_every = 10;
  /// md_rk4 only: also take two half steps and track the step-doubling error estimate.
  bool rk4_error_estimate = false;
  ComputeOptions compute;

  void validate() const;
};

struct SolverState {
  Vector x;
  std::optional<Vector> u;
  std::optional<Vector> v;
  /// EG+- only: the constant u_i v_i. When set, steps compute v = product / u so the
  /// invariant does not accumulate rounding error.
  std::optional<double> factor_product;
  long step_index = 0;
  double algo_time = 0.0;
};

class DivergenceError : public std::runtime_error {
public:
  DivergenceError(std::string const &what, std::optional<Index> coordinate = std::nullopt)
    : std::runtime_error(what)
    , coordinate_{coordinate}
  {
  }
  std::optional<Index> coordinate() const { return coordinate_; }

private:
  std::optional<Index> coordinate_;
};

/// A multiplicative factor 1 -+ 2 eta g_i went nonpositive in an HWF step.
class StepSizeError : public DivergenceError {
public:
  using DivergenceError::DivergenceError;
};

/// x = 0 except x[i0] = theta_hat / sqrt(3).
SolverState initialize_md(MeasurementSet const &meas, Index i0, double beta);

/// EG+-: U_i0 = theta_hat/(2 sqrt 3) + sqrt(theta_hat^2/12 + beta^2/4), V_i0 = beta^2 / (4 U_i0),
/// U_i = V_i = beta/2 elsewhere. HWF stores the element-wise square roots.
SolverState initialize_factored(MeasurementSet const &meas, Index i0, double beta, Algorithm algorithm);

SolverState step_hwf(SolverState const &state, MeasurementSet const &meas, double eta_eff,
                     ComputeOptions const &opts = {});
SolverState step_egpm(SolverState const &state, MeasurementSet const &meas, double eta_eff,
                      ComputeOptions const &opts = {});
SolverState step_md_rk4(SolverState const &state, MeasurementSet const &meas, HypentropyMap const &map,
                        double h, ComputeOptions const &opts = {});

/// Same steps driven by an arbitrary gradient (population gradient, test fields).
using GradientFn = std::function<Vector(Vector const &)>;
SolverState step_hwf(SolverState const &state, GradientFn const &grad, double eta_eff);
SolverState step_egpm(SolverState const &state, GradientFn const &grad, double eta_eff);
SolverState step_md_rk4(SolverState const &state, GradientFn const &grad, HypentropyMap const &map, double h);

/// ||RK4(h) - RK4(h/2) o RK4(h/2)||_inf / 15
double rk4_error_estimate(SolverState const &state, GradientFn const &grad, HypentropyMap const &map, double h);

struct DivergenceReport {
  long step = 0;
  std::string reason;
  std::optional<Index> coordinate;
};

struct RunResult {
  SolverState final_state;
  double theta_hat = 0.0;
  double eta_eff = 0.0;
  Index i0 = 0;
  bool stopped_early = false;
  std::optional<DivergenceReport> failure;
  double max_rk4_error = 0.0;
};

/// Called with the state at step 0, every record_every steps, and the final state,
/// along with the empirical risk at that state.
using StateObserver = std::function<void(SolverState const &, double risk)>;

/// Initializes for config.algorithm and iterates until max_steps or the stopping rule.
/// Divergence ends the run and is reported in RunResult::failure rather than thrown.
RunResult run(MeasurementSet const &meas, SparseSignal const *signal, SolverConfig const &config, Index i0,
              StateObserver const &observer = {});

} // namespace sparsepr
