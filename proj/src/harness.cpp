#include "sparsepr/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace sparsepr {

namespace {

std::string_view trim(std::string_view s)
{
  auto const first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  auto const last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep)
{
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    auto const pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) {
      return parts;
    }
    start = pos + 1;
  }
}

template <typename T>
T parse_number(std::string_view key, std::string_view text)
{
  T value{};
  auto const *end = text.data() + text.size();
  auto const [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw ConfigError("invalid value '" + std::string(text) + "' for '" + std::string(key) + "'");
  }
  return value;
}

bool parse_bool(std::string_view key, std::string_view text)
{
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw ConfigError("invalid boolean '" + std::string(text) + "' for '" + std::string(key) + "'");
}

// "1,2,5" or "1..10" (inclusive) or a mix of both
std::vector<std::uint64_t> parse_seeds(std::string_view key, std::string_view text)
{
  std::vector<std::uint64_t> seeds;
  for (auto part : split(text, ',')) {
    auto const dots = part.find("..");
    if (dots == std::string_view::npos) {
      seeds.push_back(parse_number<std::uint64_t>(key, part));
      continue;
    }
    auto const lo = parse_number<std::uint64_t>(key, trim(part.substr(0, dots)));
    auto const hi = parse_number<std::uint64_t>(key, trim(part.substr(dots + 2)));
    if (hi < lo) {
      throw ConfigError("empty seed range '" + std::string(part) + "'");
    }
    for (auto s = lo; s <= hi; ++s) {
      seeds.push_back(s);
    }
  }
  return seeds;
}

template <typename T>
std::vector<T> parse_list(std::string_view key, std::string_view text)
{
  std::vector<T> out;
  if (trim(text).empty()) {
    return out;
  }
  for (auto part : split(text, ',')) {
    out.push_back(parse_number<T>(key, part));
  }
  return out;
}

template <typename Fn>
void parallel_for(std::size_t count, int workers, Fn const &fn)
{
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(count);
  {
    std::vector<std::jthread> pool;
    auto const n_threads = std::min<std::size_t>(static_cast<std::size_t>(workers), count);
    for (std::size_t w = 0; w < n_threads; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          std::size_t const i = next.fetch_add(1);
          if (i >= count) {
            return;
          }
          try {
            fn(i);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
  }
  for (auto const &e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

double median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  std::size_t const h = v.size() / 2;
  return v.size() % 2 == 1 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

Index oracle_coordinate(SparseSignal const &signal)
{
  Index best = signal.support().front();
  for (Index i : signal.support()) {
    if (std::abs(signal.values()[i]) > std::abs(signal.values()[best])) {
      best = i;
    }
  }
  return best;
}

std::filesystem::path trajectory_name(ExperimentSpec const &spec, std::uint64_t seed)
{
  std::ostringstream name;
  name << "traj_" << to_string(spec.solver.algorithm) << "_n" << spec.n << "_k" << spec.k << "_m" << spec.m
       << "_beta" << format_double(spec.solver.beta) << "_seed" << seed << ".csv";
  return spec.output_dir / name.str();
}

std::ofstream open_output(std::filesystem::path const &path)
{
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  return out;
}

void finish_output(std::ofstream &out, std::filesystem::path const &path)
{
  out.flush();
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

SweepSummary summarize(std::vector<TrialResult> trials)
{
  std::sort(trials.begin(), trials.end(), [](TrialResult const &a, TrialResult const &b) {
    if (a.m != b.m) return a.m < b.m;
    if (a.beta != b.beta) return a.beta > b.beta;
    return a.seed < b.seed;
  });
  SweepSummary summary;
  for (std::size_t i = 0; i < trials.size();) {
    std::size_t j = i;
    while (j < trials.size() && trials[j].m == trials[i].m && trials[j].beta == trials[i].beta) {
      ++j;
    }
    SweepRow row;
    row.n = trials[i].n;
    row.k = trials[i].k;
    row.m = trials[i].m;
    row.beta = trials[i].beta;
    std::vector<double> finals, t1s;
    long audits = 0;
    for (std::size_t t = i; t < j; ++t) {
      ++row.trials;
      row.successes += trials[t].success ? 1 : 0;
      audits += trials[t].audit.all_passed() ? 1 : 0;
      finals.push_back(trials[t].stages.final_rel_dist);
      if (trials[t].stages.t1_step) {
        t1s.push_back(static_cast<double>(*trials[t].stages.t1_step));
      }
    }
    row.median_final_rel_dist = median(finals);
    if (!t1s.empty()) {
      row.median_t1_step = median(t1s);
    }
    row.audit_pass_rate = static_cast<double>(audits) / static_cast<double>(row.trials);
    summary.rows.push_back(row);
    i = j;
  }
  summary.trials = std::move(trials);
  return summary;
}

SweepSummary run_trials(std::vector<ExperimentSpec> const &cells, ExperimentSpec const &base,
                        std::string_view summary_name)
{
  struct Task {
    std::size_t cell;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (auto seed : base.seeds) {
      tasks.push_back({c, seed});
    }
  }
  std::vector<TrialResult> results(tasks.size());
  parallel_for(tasks.size(), base.workers, [&](std::size_t i) {
    ExperimentSpec cell = cells[tasks[i].cell];
    if (base.workers > 1) {
      cell.solver.compute.threads = 1;
    }
    results[i] = run_single(cell, tasks[i].seed);
  });
  SweepSummary summary = summarize(std::move(results));
  summary.csv_path = base.output_dir / summary_name;
  emit_summary_csv(summary, summary.csv_path);
  return summary;
}

} // namespace

void ExperimentSpec::validate(SweepKind kind) const
{
  if (n < 1 || k < 1 || m < 1) throw ConfigError("n, k, m must all be at least 1");
  if (k > n) throw ConfigError("k must not exceed n");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (!(delta_audit > 0.0)) throw ConfigError("delta_audit must be positive");
  if (!(success_threshold > 0.0)) throw ConfigError("success_threshold must be positive");
  if (!(signal_scale > 0.0)) throw ConfigError("signal_scale must be positive");
  if (workers < 1) throw ConfigError("workers must be at least 1");
  try {
    solver.validate();
  } catch (std::invalid_argument const &e) {
    throw ConfigError(e.what());
  }
  if (kind == SweepKind::beta) {
    if (beta_grid.empty()) throw ConfigError("beta sweep needs a non-empty beta_grid");
    for (double b : beta_grid) {
      if (!(b > 0.0)) throw ConfigError("beta_grid entries must be positive");
    }
  }
  if (kind == SweepKind::m) {
    if (m_grid.empty()) throw ConfigError("m sweep needs a non-empty m_grid");
    for (Index mm : m_grid) {
      if (mm < 1) throw ConfigError("m_grid entries must be at least 1");
    }
  }
  Index const largest_m = kind == SweepKind::m ? *std::max_element(m_grid.begin(), m_grid.end()) : m;
  if (storage == Storage::dense && static_cast<double>(n) * static_cast<double>(largest_m) > dense_entry_limit) {
    throw ConfigError("n*m = " + std::to_string(static_cast<double>(n) * static_cast<double>(largest_m)) +
                      " sensing entries exceeds the dense limit of 1e8 (" +
                      std::to_string(8.0 * dense_entry_limit / 1e9) + " GB); set storage = regenerate");
  }
}

void apply_setting(ExperimentSpec &spec, std::string_view key, std::string_view value)
{
  value = trim(value);
  try {
    if (key == "n") spec.n = parse_number<Index>(key, value);
    else if (key == "k") spec.k = parse_number<Index>(key, value);
    else if (key == "m") spec.m = parse_number<Index>(key, value);
    else if (key == "seeds" || key == "seed") spec.seeds = parse_seeds(key, value);
    else if (key == "algorithm") spec.solver.algorithm = parse_algorithm(value);
    else if (key == "beta") spec.solver.beta = parse_number<double>(key, value);
    else if (key == "eta") spec.solver.eta = parse_number<double>(key, value);
    else if (key == "max_steps") spec.solver.max_steps = parse_number<long>(key, value);
    else if (key == "step_scale") spec.solver.step_scale = parse_step_scale(value);
    else if (key == "stop_tol") {
      if (value.empty() || value == "none") spec.solver.stop_tol.reset();
      else spec.solver.stop_tol = parse_number<double>(key, value);
    }
    else if (key == "record_every") spec.solver.record_every = parse_number<long>(key, value);
    else if (key == "rk4_error_estimate") spec.solver.rk4_error_estimate = parse_bool(key, value);
    else if (key == "compensated") spec.solver.compute.compensated = parse_bool(key, value);
    else if (key == "threads") spec.solver.compute.threads = parse_number<int>(key, value);
    else if (key == "beta_grid") spec.beta_grid = parse_list<double>(key, value);
    else if (key == "m_grid") spec.m_grid = parse_list<Index>(key, value);
    else if (key == "i0_mode") {
      if (value == "estimate") spec.i0_mode = I0Mode::estimate;
      else if (value == "oracle") spec.i0_mode = I0Mode::oracle;
      else throw ConfigError("i0_mode must be 'estimate' or 'oracle'");
    }
    else if (key == "delta_audit") spec.delta_audit = parse_number<double>(key, value);
    else if (key == "output_dir") spec.output_dir = std::string(value);
    else if (key == "success_threshold") spec.success_threshold = parse_number<double>(key, value);
    else if (key == "min_component") {
      if (value.empty() || value == "none") spec.min_component.reset();
      else spec.min_component = parse_number<double>(key, value);
    }
    else if (key == "signal_scale") spec.signal_scale = parse_number<double>(key, value);
    else if (key == "storage") {
      if (value == "dense") spec.storage = Storage::dense;
      else if (value == "regenerate") spec.storage = Storage::regenerate;
      else throw ConfigError("storage must be 'dense' or 'regenerate'");
    }
    else if (key == "workers") spec.workers = parse_number<int>(key, value);
    else throw ConfigError("unknown setting '" + std::string(key) + "'");
  } catch (std::invalid_argument const &e) {
    throw ConfigError(e.what());
  }
}

ExperimentSpec parse_config(std::istream &in, ExperimentSpec spec)
{
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view{line};
    view = trim(view.substr(0, view.find('#')));
    if (view.empty()) {
      continue;
    }
    auto const eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    apply_setting(spec, trim(view.substr(0, eq)), view.substr(eq + 1));
  }
  return spec;
}

ExperimentSpec load_config(std::filesystem::path const &path, ExperimentSpec spec)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot read config file " + path.string());
  }
  return parse_config(in, std::move(spec));
}

TrialResult run_single(ExperimentSpec const &spec, std::uint64_t seed)
{
  spec.validate();
  SignalOptions opts;
  opts.min_component = spec.min_component;
  opts.scale = spec.signal_scale;

  TrialResult out;
  out.n = spec.n;
  out.k = spec.k;
  out.m = spec.m;
  out.beta = spec.solver.beta;
  out.seed = seed;
  out.csv_path = trajectory_name(spec, seed);

  std::optional<SparseSignal> drawn;
  try {
    drawn = generate_signal(spec.n, spec.k, seed, opts);
  } catch (DegenerateInstanceError const &e) {
    out.failure = e.what();
    emit_csv({}, out.csv_path);
    return out;
  }
  SparseSignal const &signal = *drawn;
  MeasurementSet const meas = generate_measurements(signal, spec.m, seed, spec.storage);
  out.i0 = spec.i0_mode == I0Mode::oracle ? oracle_coordinate(signal) : estimate_support_coordinate(meas);
  out.i0_on_support = signal.on_support(out.i0);

  std::vector<TrajectoryRecord> trajectory;
  try {
    RecordedRun rr = run_recorded(meas, signal, spec.solver, out.i0);
    trajectory = std::move(rr.trajectory);
    out.steps = rr.result.final_state.step_index;
    if (rr.result.failure) {
      out.failure = "step " + std::to_string(rr.result.failure->step) + ": " + rr.result.failure->reason;
    }
  } catch (DegenerateInstanceError const &e) {
    out.failure = e.what();
  }
  out.stages = detect_stages(trajectory, spec.delta_audit);
  out.audit = audit_theorem_invariants(trajectory, signal, spec.m, spec.delta_audit);
  out.success = !out.failure && !trajectory.empty() && out.stages.final_rel_dist <= spec.success_threshold;
  emit_csv(trajectory, out.csv_path);
  return out;
}

SweepSummary run_beta_sweep(ExperimentSpec const &spec)
{
  spec.validate(SweepKind::beta);
  std::vector<ExperimentSpec> cells;
  for (double beta : spec.beta_grid) {
    ExperimentSpec cell = spec;
    cell.solver.beta = beta;
    cells.push_back(std::move(cell));
  }
  return run_trials(cells, spec, "summary_beta.csv");
}

SweepSummary run_m_sweep(ExperimentSpec const &spec)
{
  spec.validate(SweepKind::m);
  std::vector<ExperimentSpec> cells;
  for (Index m : spec.m_grid) {
    ExperimentSpec cell = spec;
    cell.m = m;
    cells.push_back(std::move(cell));
  }
  return run_trials(cells, spec, "summary_m.csv");
}

std::string format_double(double v)
{
  std::array<char, 64> buf{};
  auto const [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void write_trajectory_csv(std::ostream &out, std::span<TrajectoryRecord const> records)
{
  out << trajectory_header << '\n';
  for (auto const &r : records) {
    out << r.step_index << ',' << format_double(r.algo_time) << ',' << format_double(r.risk) << ','
        << format_double(r.rel_dist) << ',' << format_double(r.rel_bregman) << ',' << format_double(r.off_support_l1)
        << ',' << format_double(r.min_support_ratio) << ',' << format_double(r.norm_sq) << ','
        << format_double(r.inner_ratio) << '\n';
  }
}

void emit_csv(std::span<TrajectoryRecord const> records, std::filesystem::path const &path)
{
  auto out = open_output(path);
  write_trajectory_csv(out, records);
  finish_output(out, path);
}

std::vector<TrajectoryRecord> read_trajectory_csv(std::istream &in)
{
  std::string line;
  if (!std::getline(in, line) || line != trajectory_header) {
    throw IoError("trajectory CSV: missing or unexpected header");
  }
  std::vector<TrajectoryRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    auto const cells = split(line, ',');
    if (cells.size() != 9) {
      throw IoError("trajectory CSV: expected 9 columns, got " + std::to_string(cells.size()));
    }
    try {
      TrajectoryRecord r;
      r.step_index = parse_number<long>("step", cells[0]);
      std::array<double *, 8> const fields{&r.algo_time,      &r.risk,          &r.rel_dist,  &r.rel_bregman,
                                           &r.off_support_l1, &r.min_support_ratio, &r.norm_sq, &r.inner_ratio};
      for (std::size_t c = 0; c < fields.size(); ++c) {
        *fields[c] = parse_number<double>("column", cells[c + 1]);
      }
      records.push_back(r);
    } catch (ConfigError const &e) {
      throw IoError(std::string("trajectory CSV: ") + e.what());
    }
  }
  return records;
}

std::vector<TrajectoryRecord> read_trajectory_csv(std::filesystem::path const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return read_trajectory_csv(in);
}

void write_summary_csv(std::ostream &out, SweepSummary const &summary)
{
  out << summary_header << '\n';
  for (auto const &r : summary.rows) {
    out << r.n << ',' << r.k << ',' << r.m << ',' << format_double(r.beta) << ',' << r.trials << ',' << r.successes
        << ',' << format_double(r.median_final_rel_dist) << ','
        << (r.median_t1_step ? format_double(*r.median_t1_step) : std::string{}) << ','
        << format_double(r.audit_pass_rate) << '\n';
  }
}

void emit_summary_csv(SweepSummary const &summary, std::filesystem::path const &path)
{
  auto out = open_output(path);
  write_summary_csv(out, summary);
  finish_output(out, path);
}

} // namespace sparsepr
