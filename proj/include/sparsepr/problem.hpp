#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace sparsepr {

using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class DimensionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

class DegenerateInstanceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

void require_dims(Index got, Index want, char const *what);

// Ground-truth k-sparse vector. Immutable once built; the support is derived from
// the nonzero pattern so the two can never disagree.
class SparseSignal {
public:
  explicit SparseSignal(Vector values);

  Vector const &values() const { return values_; }
  std::vector<Index> const &support() const { return support_; }
  Index n() const { return values_.size(); }
  Index k() const { return static_cast<Index>(support_.size()); }
  double norm() const { return norm_; }
  bool on_support(Index i) const;

  /// min_{i in S} |x_i| / ||x||_2
  double min_component() const;
  /// max_i |x_i| / ||x||_2
  double max_component() const;

private:
  Vector values_;
  std::vector<Index> support_;
  double norm_;
};

struct SignalOptions {
  /// Resample until every support entry satisfies |x_i| >= min_component * ||x||_2.
  std::optional<double> min_component;
  /// ||x*||_2 after normalization.
  double scale = 1.0;
  int max_attempts = 100000;
};

/// Support drawn uniformly without replacement first, then N(0,1) values, then
/// normalized. When min_component * sqrt(k) == 1 the constraint set is exactly the
/// flat vectors with |x_i| = scale / sqrt(k); those are drawn with uniform random signs.
SparseSignal generate_signal(Index n, Index k, std::uint64_t seed, SignalOptions const &options = {});

enum class Storage {
  dense,      ///< m x n row-major matrix in memory (8 m n bytes)
  regenerate, ///< rows regenerated from the seed on every pass
};

struct ComputeOptions {
  /// Kahan compensation on the sum over measurements.
  bool compensated = false;
  /// OpenMP threads for the dense kernels; 0 = runtime default. Results do not depend on it.
  int threads = 0;
};

// Gaussian sensing vectors A_j and noiseless observations Y_j = (A_j . x*)^2.
class MeasurementSet {
public:
  /// Hand-built instance; observations computed from the signal.
  static MeasurementSet from_matrix(RowMatrix sensing, SparseSignal const &signal);
  /// Hand-built instance with given observations.
  static MeasurementSet from_data(RowMatrix sensing, Vector observations);

  Index n() const { return n_; }
  Index m() const { return static_cast<Index>(observations_.size()); }
  std::uint64_t seed() const { return seed_; }
  Storage storage() const { return storage_; }
  Vector const &observations() const { return observations_; }

  /// Dense sensing matrix; throws in regenerate mode.
  RowMatrix const &sensing() const;
  /// Writes row j into out (length n).
  void row(Index j, std::span<double> out) const;

  /// q = A x
  void forward(Vector const &x, Vector &q, ComputeOptions const &opts = {}) const;
  /// out = A^T w, accumulated over j in index order for every coordinate.
  void adjoint(Vector const &w, Vector &out, ComputeOptions const &opts = {}) const;

private:
  friend MeasurementSet generate_measurements(SparseSignal const &, Index, std::uint64_t, Storage);
  MeasurementSet() = default;

  Index n_ = 0;
  std::uint64_t seed_ = 0;
  Storage storage_ = Storage::dense;
  RowMatrix sensing_;
  Vector observations_;
};

/// Row j is filled from the stream derive_seed(seed, Stream::measurement, j).
MeasurementSet generate_measurements(SparseSignal const &signal, Index m, std::uint64_t seed,
                                     Storage storage = Storage::dense);

/// Dot product with eight interleaved partial sums; the fixed order makes it reproducible.
double dot(std::span<double const> a, std::span<double const> b);

struct RiskEvaluation {
  double value = 0.0;
  Vector gradient;
};

/// (1/4m) sum_j ((A_j . x)^2 - Y_j)^2
double empirical_risk(Vector const &x, MeasurementSet const &meas, ComputeOptions const &opts = {});
/// (1/m) sum_j ((A_j . x)^2 - Y_j)(A_j . x) A_j
Vector empirical_gradient(Vector const &x, MeasurementSet const &meas, ComputeOptions const &opts = {});
/// Risk and gradient sharing one forward pass.
RiskEvaluation evaluate(Vector const &x, MeasurementSet const &meas, ComputeOptions const &opts = {});

/// Expected gradient over Gaussian sensing vectors:
/// (3||x||^2 - ||x*||^2) x - 2 (x . x*) x*
Vector population_gradient(Vector const &x, SparseSignal const &signal);

/// sqrt(mean Y), estimator of ||x*||_2.
double estimate_signal_size(MeasurementSet const &meas);
/// argmax_i sum_j Y_j A_ji^2, lowest index on ties.
Index estimate_support_coordinate(MeasurementSet const &meas);

} // namespace sparsepr
