#include "sparsepr/problem.hpp"
#include "sparsepr/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sparsepr {

namespace {

int thread_count(ComputeOptions const &opts)
{
#ifdef _OPENMP
  return opts.threads > 0 ? opts.threads : omp_get_max_threads();
#else
  (void)opts;
  return 1;
#endif
}

void fill_row(std::uint64_t seed, Index j, std::span<double> out)
{
  SplitMix64 gen{derive_seed(seed, Stream::measurement, static_cast<std::uint64_t>(j))};
  NormalSampler normal;
  for (double &a : out) {
    a = normal(gen);
  }
}

// out_i += w * row_i, with optional per-coordinate compensation terms.
inline void axpy(double w, double const *row, double *out, double *comp, Index lo, Index hi)
{
  if (comp == nullptr) {
    for (Index i = lo; i < hi; ++i) {
      out[i] += w * row[i];
    }
    return;
  }
  for (Index i = lo; i < hi; ++i) {
    double const y = w * row[i] - comp[i];
    double const t = out[i] + y;
    comp[i] = (t - out[i]) - y;
    out[i] = t;
  }
}

constexpr Index column_block = 2048;

} // namespace

void require_dims(Index got, Index want, char const *what)
{
  if (got != want) {
    throw DimensionError(std::string(what) + ": dimension " + std::to_string(got) + ", expected " +
                         std::to_string(want));
  }
}

SparseSignal::SparseSignal(Vector values)
  : values_{std::move(values)}
{
  for (Index i = 0; i < values_.size(); ++i) {
    if (values_[i] != 0.0) {
      support_.push_back(i);
    }
  }
  if (support_.empty()) {
    throw std::invalid_argument("SparseSignal: signal has no nonzero entries");
  }
  norm_ = values_.norm();
}

bool SparseSignal::on_support(Index i) const
{
  return std::binary_search(support_.begin(), support_.end(), i);
}

double SparseSignal::min_component() const
{
  double lo = std::numeric_limits<double>::infinity();
  for (Index i : support_) {
    lo = std::min(lo, std::abs(values_[i]));
  }
  return lo / norm_;
}

double SparseSignal::max_component() const
{
  return values_.cwiseAbs().maxCoeff() / norm_;
}

SparseSignal generate_signal(Index n, Index k, std::uint64_t seed, SignalOptions const &options)
{
  if (k < 1 || n < 1 || k > n) {
    throw std::invalid_argument("generate_signal: need 1 <= k <= n, got n=" + std::to_string(n) +
                                " k=" + std::to_string(k));
  }
  if (!(options.scale > 0.0) || !std::isfinite(options.scale)) {
    throw std::invalid_argument("generate_signal: scale must be positive and finite");
  }
  double const root_k = std::sqrt(static_cast<double>(k));
  bool flat = false;
  if (options.min_component) {
    double const c = *options.min_component;
    if (!(c >= 0.0) || c * root_k > 1.0 + 1e-12) {
      throw std::invalid_argument("generate_signal: min_component * sqrt(k) must lie in [0, 1]");
    }
    flat = c * root_k >= 1.0 - 1e-12;
  }

  SplitMix64 gen{derive_seed(seed, Stream::signal)};

  // partial Fisher-Yates: first k slots become the support
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index i = 0; i < k; ++i) {
    auto const j = i + static_cast<Index>(uniform_below(gen, static_cast<std::uint64_t>(n - i)));
    std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> support(perm.begin(), perm.begin() + k);
  std::sort(support.begin(), support.end());

  Vector values = Vector::Zero(n);
  if (flat) {
    for (Index i : support) {
      values[i] = (gen() >> 63) != 0 ? -options.scale / root_k : options.scale / root_k;
    }
    return SparseSignal{std::move(values)};
  }

  NormalSampler normal;
  for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
    for (Index i : support) {
      double z = 0.0;
      while (z == 0.0) {
        z = normal(gen);
      }
      values[i] = z;
    }
    values *= options.scale / values.norm();
    if (!options.min_component) {
      return SparseSignal{values};
    }
    double lo = std::numeric_limits<double>::infinity();
    for (Index i : support) {
      lo = std::min(lo, std::abs(values[i]));
    }
    if (lo / values.norm() >= *options.min_component) {
      return SparseSignal{values};
    }
  }
  throw DegenerateInstanceError("generate_signal: no draw met min_component within " +
                                std::to_string(options.max_attempts) + " attempts");
}

double dot(std::span<double const> a, std::span<double const> b)
{
  std::array<double, 8> acc{};
  std::size_t const n = a.size();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    for (std::size_t l = 0; l < 8; ++l) {
      acc[l] += a[i + l] * b[i + l];
    }
  }
  double tail = 0.0;
  for (; i < n; ++i) {
    tail += a[i] * b[i];
  }
  return ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7])) + tail;
}

MeasurementSet MeasurementSet::from_matrix(RowMatrix sensing, SparseSignal const &signal)
{
  require_dims(signal.n(), sensing.cols(), "MeasurementSet::from_matrix");
  Vector y(sensing.rows());
  for (Index j = 0; j < sensing.rows(); ++j) {
    double const q = dot({sensing.row(j).data(), static_cast<std::size_t>(sensing.cols())},
                         {signal.values().data(), static_cast<std::size_t>(signal.n())});
    y[j] = q * q;
  }
  return from_data(std::move(sensing), std::move(y));
}

MeasurementSet MeasurementSet::from_data(RowMatrix sensing, Vector observations)
{
  require_dims(observations.size(), sensing.rows(), "MeasurementSet::from_data");
  if (sensing.rows() < 1 || sensing.cols() < 1) {
    throw std::invalid_argument("MeasurementSet: need m >= 1 and n >= 1");
  }
  if ((observations.array() < 0.0).any()) {
    throw std::invalid_argument("MeasurementSet: observations must be nonnegative");
  }
  MeasurementSet ms;
  ms.n_ = sensing.cols();
  ms.sensing_ = std::move(sensing);
  ms.observations_ = std::move(observations);
  return ms;
}

RowMatrix const &MeasurementSet::sensing() const
{
  if (storage_ != Storage::dense) {
    throw std::logic_error("MeasurementSet: sensing matrix is not stored in regenerate mode");
  }
  return sensing_;
}

void MeasurementSet::row(Index j, std::span<double> out) const
{
  require_dims(static_cast<Index>(out.size()), n_, "MeasurementSet::row");
  if (storage_ == Storage::dense) {
    auto const r = sensing_.row(j);
    std::copy(r.data(), r.data() + n_, out.begin());
  } else {
    fill_row(seed_, j, out);
  }
}

void MeasurementSet::forward(Vector const &x, Vector &q, ComputeOptions const &opts) const
{
  require_dims(x.size(), n_, "forward");
  Index const m = this->m();
  q.resize(m);
  std::span<double const> const xs{x.data(), static_cast<std::size_t>(n_)};
  [[maybe_unused]] int const threads = thread_count(opts);
  if (storage_ == Storage::dense) {
#pragma omp parallel for schedule(static) num_threads(threads)
    for (Index j = 0; j < m; ++j) {
      q[j] = dot({sensing_.row(j).data(), static_cast<std::size_t>(n_)}, xs);
    }
    return;
  }
#pragma omp parallel num_threads(threads)
  {
    std::vector<double> buf(static_cast<std::size_t>(n_));
#pragma omp for schedule(static)
    for (Index j = 0; j < m; ++j) {
      fill_row(seed_, j, buf);
      q[j] = dot(buf, xs);
    }
  }
}

void MeasurementSet::adjoint(Vector const &w, Vector &out, ComputeOptions const &opts) const
{
  require_dims(w.size(), m(), "adjoint");
  Index const m = this->m();
  out = Vector::Zero(n_);
  Vector comp;
  if (opts.compensated) {
    comp = Vector::Zero(n_);
  }
  double *const comp_ptr = opts.compensated ? comp.data() : nullptr;

  if (storage_ == Storage::dense) {
    [[maybe_unused]] int const threads = thread_count(opts);
    Index const blocks = (n_ + column_block - 1) / column_block;
#pragma omp parallel for schedule(static) num_threads(threads)
    for (Index b = 0; b < blocks; ++b) {
      Index const lo = b * column_block;
      Index const hi = std::min(n_, lo + column_block);
      for (Index j = 0; j < m; ++j) {
        axpy(w[j], sensing_.row(j).data(), out.data(), comp_ptr, lo, hi);
      }
    }
    return;
  }
  // rows are expensive to regenerate, so visit each once and sweep all columns
  std::vector<double> buf(static_cast<std::size_t>(n_));
  for (Index j = 0; j < m; ++j) {
    fill_row(seed_, j, buf);
    axpy(w[j], buf.data(), out.data(), comp_ptr, 0, n_);
  }
}

MeasurementSet generate_measurements(SparseSignal const &signal, Index m, std::uint64_t seed, Storage storage)
{
  if (m < 1) {
    throw std::invalid_argument("generate_measurements: need m >= 1");
  }
  Index const n = signal.n();
  MeasurementSet ms;
  ms.n_ = n;
  ms.seed_ = seed;
  ms.storage_ = storage;
  ms.observations_.resize(m);
  std::span<double const> const xs{signal.values().data(), static_cast<std::size_t>(n)};
  if (storage == Storage::dense) {
    ms.sensing_.resize(m, n);
    for (Index j = 0; j < m; ++j) {
      std::span<double> r{ms.sensing_.row(j).data(), static_cast<std::size_t>(n)};
      fill_row(seed, j, r);
      double const q = dot(r, xs);
      ms.observations_[j] = q * q;
    }
  } else {
    std::vector<double> buf(static_cast<std::size_t>(n));
    for (Index j = 0; j < m; ++j) {
      fill_row(seed, j, buf);
      double const q = dot(buf, xs);
      ms.observations_[j] = q * q;
    }
  }
  return ms;
}

double empirical_risk(Vector const &x, MeasurementSet const &meas, ComputeOptions const &opts)
{
  Vector q;
  meas.forward(x, q, opts);
  Vector const &y = meas.observations();
  double sum = 0.0;
  for (Index j = 0; j < meas.m(); ++j) {
    double const r = q[j] * q[j] - y[j];
    sum += r * r;
  }
  return sum / (4.0 * static_cast<double>(meas.m()));
}

RiskEvaluation evaluate(Vector const &x, MeasurementSet const &meas, ComputeOptions const &opts)
{
  Vector q;
  meas.forward(x, q, opts);
  Vector const &y = meas.observations();
  Vector w(meas.m());
  double sum = 0.0;
  for (Index j = 0; j < meas.m(); ++j) {
    double const r = q[j] * q[j] - y[j];
    sum += r * r;
    w[j] = r * q[j];
  }
  RiskEvaluation out;
  double const m = static_cast<double>(meas.m());
  out.value = sum / (4.0 * m);
  meas.adjoint(w, out.gradient, opts);
  out.gradient /= m;
  return out;
}

Vector empirical_gradient(Vector const &x, MeasurementSet const &meas, ComputeOptions const &opts)
{
  return evaluate(x, meas, opts).gradient;
}

Vector population_gradient(Vector const &x, SparseSignal const &signal)
{
  require_dims(x.size(), signal.n(), "population_gradient");
  Vector const &xs = signal.values();
  double const coef = 3.0 * x.squaredNorm() - xs.squaredNorm();
  return coef * x - 2.0 * x.dot(xs) * xs;
}

double estimate_signal_size(MeasurementSet const &meas)
{
  return std::sqrt(meas.observations().sum() / static_cast<double>(meas.m()));
}

Index estimate_support_coordinate(MeasurementSet const &meas)
{
  Index const n = meas.n();
  Vector score = Vector::Zero(n);
  std::vector<double> buf(static_cast<std::size_t>(n));
  Vector const &y = meas.observations();
  for (Index j = 0; j < meas.m(); ++j) {
    meas.row(j, buf);
    for (Index i = 0; i < n; ++i) {
      double const a = buf[static_cast<std::size_t>(i)];
      score[i] += y[j] * a * a;
    }
  }
  Index best = 0;
  for (Index i = 1; i < n; ++i) {
    if (score[i] > score[best]) {
      best = i;
    }
  }
  return best;
}

} // namespace sparsepr
