#include "sparsepr/harness.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

using namespace sparsepr;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> settings;
};

void add_common(CLI::App *cmd, CommonArgs &args)
{
  cmd->add_option("--config,-c", args.config, "key = value experiment file");
  cmd->add_option("--seed,-s", args.seed, "run this seed only (overrides 'seeds')");
  cmd->add_option("--out,-o", args.out, "output directory (overrides 'output_dir')");
  cmd->add_option("--set", args.settings, "override one setting, key=value (repeatable)");
}

ExperimentSpec build_spec(CommonArgs const &args)
{
  ExperimentSpec spec;
  if (!args.config.empty()) {
    spec = load_config(args.config);
  }
  for (auto const &kv : args.settings) {
    auto const eq = kv.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--set expects key=value, got '" + kv + "'");
    }
    apply_setting(spec, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (args.seed) {
    spec.seeds = {*args.seed};
  }
  if (!args.out.empty()) {
    spec.output_dir = args.out;
  }
  return spec;
}

std::string opt(std::optional<long> v)
{
  return v ? std::to_string(*v) : "-";
}

void print_trial(TrialResult const &t)
{
  std::cout << "seed=" << t.seed << " beta=" << format_double(t.beta) << " m=" << t.m << " i0=" << t.i0
            << (t.i0_on_support ? "" : " (off support)") << " steps=" << t.steps
            << " final_rel_dist=" << format_double(t.stages.final_rel_dist) << " t1=" << opt(t.stages.t1_step)
            << " t2=" << opt(t.stages.t2_step) << " rate="
            << (t.stages.linear_rate ? format_double(*t.stages.linear_rate) : "-")
            << " audit=" << (t.audit.all_passed() ? "pass" : "fail") << (t.success ? " recovered" : "");
  if (t.failure) {
    std::cout << " failure=\"" << *t.failure << '"';
  }
  std::cout << "\n  -> " << t.csv_path.string() << '\n';
}

void print_summary(SweepSummary const &s)
{
  for (auto const &t : s.trials) {
    print_trial(t);
  }
  write_summary_csv(std::cout, s);
  std::cout << "summary -> " << s.csv_path.string() << '\n';
}

int audit_file(ExperimentSpec const &spec, std::string const &path)
{
  auto const records = read_trajectory_csv(std::filesystem::path{path});
  SignalOptions opts;
  opts.min_component = spec.min_component;
  opts.scale = spec.signal_scale;
  auto const signal = generate_signal(spec.n, spec.k, spec.seeds.front(), opts);
  auto const stages = detect_stages(records, spec.delta_audit);
  auto const audit = audit_theorem_invariants(records, signal, spec.m, spec.delta_audit);
  auto line = [](char const *name, ClaimResult const &c) {
    std::cout << (c.passed ? "[PASS] " : "[FAIL] ") << name << " (" << c.checked << " records";
    if (c.first_violation_step) {
      std::cout << ", first violation at step " << *c.first_violation_step;
    }
    std::cout << ")\n";
  };
  std::cout << records.size() << " records, t1=" << opt(stages.t1_step) << " t2=" << opt(stages.t2_step)
            << " final_rel_dist=" << format_double(stages.final_rel_dist) << '\n';
  line("off-support l1 mass <= delta ||x*||", audit.off_support);
  line("||X||^2 window", audit.norm_window);
  line("inner-product ratio >= 0", audit.inner_ratio);
  return audit.all_passed() ? 0 : 3;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Sparse phase retrieval with hypentropy mirror descent, EG+- and HWF"};
  app.require_subcommand(1);

  CommonArgs run_args, beta_args, m_args, check_args;
  auto *run_cmd = app.add_subcommand("run", "single trials, one per seed");
  add_common(run_cmd, run_args);
  auto *beta_cmd = app.add_subcommand("sweep-beta", "trials over beta_grid x seeds");
  add_common(beta_cmd, beta_args);
  auto *m_cmd = app.add_subcommand("sweep-m", "trials over m_grid x seeds");
  add_common(m_cmd, m_args);
  auto *check_cmd = app.add_subcommand("check", "run the invariant battery, or audit a trajectory CSV");
  add_common(check_cmd, check_args);
  std::string trajectory;
  check_cmd->add_option("--trajectory,-t", trajectory, "trajectory CSV to audit against the configured instance");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    int const code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::cout << std::setprecision(6);
  try {
    if (*run_cmd) {
      auto const spec = build_spec(run_args);
      spec.validate();
      for (auto seed : spec.seeds) {
        print_trial(run_single(spec, seed));
      }
    } else if (*beta_cmd) {
      print_summary(run_beta_sweep(build_spec(beta_args)));
    } else if (*m_cmd) {
      print_summary(run_m_sweep(build_spec(m_args)));
    } else if (*check_cmd) {
      auto const spec = build_spec(check_args);
      if (!trajectory.empty()) {
        spec.validate();
        return audit_file(spec, trajectory);
      }
      return run_self_checks(std::cout, spec.seeds.front()) ? 0 : 3;
    }
  } catch (ConfigError const &e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (std::exception const &e) {
    std::cerr << "fatal: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
