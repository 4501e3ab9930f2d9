// Command line front end: solve, certify, sweep, oracle-compare, run-scenario.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "sparsecert/pipeline.hpp"

using namespace sparsecert;

namespace {

struct Common {
  std::string config;
  std::string out;
  int threads = 0;
  bool no_timing = false;
};

RunOptions run_options(const Common& c, const ExperimentConfig* config) {
  RunOptions o;
  o.out_dir = !c.out.empty() ? c.out : config ? config->output_dir : ".";
  o.threads = c.threads > 0 ? c.threads : std::max(1u, std::thread::hardware_concurrency());
  o.timing = !c.no_timing;
  o.seed = seed_from_environment();
  return o;
}

std::string path_in(const RunOptions& o, const std::string& name) {
  return (std::filesystem::path(o.out_dir) / name).string();
}

int cmd_solve(const Common& c, double lambda, double noise_level, std::optional<std::uint64_t> noise_seed) {
  if (!(lambda > 0.0)) throw ConfigError("--lambda must be positive");
  if (!(noise_level >= 0.0)) throw ConfigError("--noise-level must be nonnegative");
  const ExperimentConfig config = load_config(c.config);
  const RunOptions o = run_options(c, &config);
  const ForwardModel model = config.model();
  const std::uint64_t global = o.seed.value_or(config.sweep ? config.sweep->seed : 0);
  Observation y = model.apply(config.truth);
  if (noise_level > 0.0) {
    y += make_noise(model.grid(), model.channels(), noise_level, mix_seed(global, noise_seed.value_or(0)));
  }
  const SolveResult r = solve(model, y, lambda, config.solver);
  Json doc = solution_json(r, lambda);
  doc["noise_level"] = noise_level;
  write_text(path_in(o, "solution.json"), dump_json(doc));
  write_text(path_in(o, "certificate.csv"), certificate_csv(model.certificate(r.dual_variable)));
  std::printf("solve: %zu atoms, objective %.12g, certificate sup %.12g, gap %.3g%s\n", r.element.size(),
              r.objective, r.certificate_sup, r.duality_gap, r.converged ? "" : " (iteration cap)");
  return r.converged ? kExitOk : kExitIterationCap;
}

int cmd_certify(const Common& c) {
  const ExperimentConfig config = load_config(c.config);
  const RunOptions o = run_options(c, &config);
  const CertifyOutcome out = run_certify(config);
  write_text(path_in(o, "mndsc_report.json"), dump_json(mndsc_json(out.report, &out.estimate)));
  std::printf("certify: %s, value margin %.6g, last Cauchy gap %.3g\n", out.report.pass ? "pass" : "fail",
              out.report.value_margin, out.estimate.cauchy_gaps.back());
  for (const std::string& clause : out.report.failing_clauses) std::printf("  failing clause (%s)\n", clause.c_str());
  return out.report.pass ? kExitOk : kExitVerdict;
}

int cmd_sweep(const Common& c) {
  const ExperimentConfig config = load_config(c.config);
  if (!config.sweep) throw ConfigError("config has no sweep section");
  const RunOptions o = run_options(c, &config);
  const ForwardModel model = config.model();
  std::optional<CertifyOutcome> cert;
  if (!config.sweep->alpha) cert = run_certify(config);
  const SweepConfig sc = make_sweep_config(config, model, cert ? &cert->report : nullptr, o);
  const SweepSummary s = run_sweep(model, config.truth, sc);
  write_text(path_in(o, "sweep.csv"), sweep_csv(s.records, o.timing));
  write_text(path_in(o, "sweep.json"), dump_json(sweep_summary_json(s, sc, o.timing)));
  write_text(path_in(o, "phase.svg"), phase_svg(s, sc));
  write_text(path_in(o, "errors.svg"), errors_svg(s, sc));
  for (const std::string& w : s.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  std::printf("sweep: %zu cells, alpha %.6g, guaranteed region %s (%d cells)\n", s.records.size(), s.alpha,
              s.guaranteed_all_recovered ? "recovered" : "NOT recovered", s.guaranteed_cells);
  if (s.any_errors) return kExitSolver;
  return s.guaranteed_all_recovered ? kExitOk : kExitVerdict;
}

int cmd_oracle(const Common& c, double lambda, const std::string& setting) {
  if (!(lambda > 0.0)) throw ConfigError("--lambda must be positive");
  const ExperimentConfig config = load_config(c.config);
  if (!setting.empty()) {
    SettingKind kind;
    try {
      kind = setting_kind_from_string(setting);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
    if (kind != config.setting.kind) {
      throw ConfigError("--setting " + setting + " does not match the config setting " +
                        to_string(config.setting.kind));
    }
  }
  const RunOptions o = run_options(c, &config);
  OracleComparison cmp;
  try {
    cmp = run_oracle_compare(config, lambda);
  } catch (const OracleError& e) {
    std::fprintf(stderr, "oracle solver failed: %s\n", e.what());
    return kExitSolver;
  }
  write_text(path_in(o, "oracle.json"), dump_json(cmp.document));
  std::printf("oracle-compare: continuous %.15g, grid %.15g, gap %.3g (bound %.3g)\n", cmp.continuous_objective,
              cmp.grid_objective, cmp.gap, cmp.gap_bound);
  return cmp.dominance ? kExitOk : kExitVerdict;
}

int cmd_scenario(const Common& c, const std::vector<std::string>& dirs) {
  const RunOptions o = run_options(c, nullptr);
  bool all = true, errored = false;
  for (const std::string& dir : dirs) {
    const ScenarioResult r = run_scenario(dir, o);
    std::printf("%s: %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL");
    if (!r.error.empty()) std::printf("  error: %s\n", r.error.c_str());
    for (const ScenarioCheck& k : r.checks) {
      if (!k.pass) std::printf("  %s %s\n", k.path.c_str(), k.detail.c_str());
    }
    all = all && r.pass;
    errored = errored || !r.error.empty();
  }
  if (errored) return kExitSolver;
  return all ? kExitOk : kExitVerdict;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-the-grid sparse recovery: solvers, dual certificates and recovery sweeps"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool config) {
    if (config) sub->add_option("config", common.config, "experiment config (JSON)")->required();
    sub->add_option("--out", common.out, "output directory (default: config output_dir)");
    sub->add_option("--threads", common.threads, "worker threads for sweeps")->check(CLI::NonNegativeNumber);
    sub->add_flag("--no-timing", common.no_timing, "write wall times as 0 for byte-reproducible output");
  };

  double lambda = 0.0, noise_level = 0.0;
  std::uint64_t noise_seed = 0;
  std::string setting;
  std::vector<std::string> scenario_dirs;

  auto* solve_cmd = app.add_subcommand("solve", "primal solve of P_lambda(K u0 + w)");
  add_common(solve_cmd, true);
  solve_cmd->add_option("--lambda", lambda, "regularization weight")->required();
  solve_cmd->add_option("--noise-level", noise_level, "norm of the added noise");
  auto* seed_opt = solve_cmd->add_option("--noise-seed", noise_seed, "noise seed");

  auto* certify_cmd = app.add_subcommand("certify", "minimal-norm certificate and MNDSC check");
  add_common(certify_cmd, true);

  auto* sweep_cmd = app.add_subcommand("sweep", "recovery sweep over lambda and noise");
  add_common(sweep_cmd, true);

  auto* oracle_cmd = app.add_subcommand("oracle-compare", "continuous solver against the grid oracle");
  add_common(oracle_cmd, true);
  oracle_cmd->add_option("--lambda", lambda, "regularization weight")->required();
  oracle_cmd->add_option("--setting", setting, "expected setting (radon_tv, bv_indicator, paired_wasserstein)");

  auto* scenario_cmd = app.add_subcommand("run-scenario", "run and check regression scenarios");
  add_common(scenario_cmd, false);
  scenario_cmd->add_option("dirs", scenario_dirs, "scenario directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*solve_cmd) {
      std::optional<std::uint64_t> seed;
      if (*seed_opt) seed = noise_seed;
      return cmd_solve(common, lambda, noise_level, seed);
    }
    if (*certify_cmd) return cmd_certify(common);
    if (*sweep_cmd) return cmd_sweep(common);
    if (*oracle_cmd) return cmd_oracle(common, lambda, setting);
    if (*scenario_cmd) return cmd_scenario(common, scenario_dirs);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitConfig;
}
