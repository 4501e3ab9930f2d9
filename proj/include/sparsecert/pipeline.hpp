#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sparsecert/io.hpp"

namespace sparsecert {

/// Process exit codes of the command line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitIterationCap = 2,
  kExitVerdict = 3,
  kExitSolver = 4,
};

struct RunOptions {
  std::string out_dir = ".";
  int threads = 1;
  bool timing = true;
  /// Overrides the configured global seed.
  std::optional<std::uint64_t> seed;
};

/// SPARSE_CERTIFY_SEED, if set. Throws ConfigError on a malformed value.
std::optional<std::uint64_t> seed_from_environment();

struct CertifyOutcome {
  CertificateEstimate estimate;
  MndscReport report;
};

/// Certificate estimate for y0 = K u0 followed by the MNDSC check.
CertifyOutcome run_certify(const ExperimentConfig& config);

/// Sweep configuration from the config's sweep section. Without an explicit
/// alpha, `report` supplies the value margin for the default.
SweepConfig make_sweep_config(const ExperimentConfig& config, const ForwardModel& model,
                              const MndscReport* report, const RunOptions& options);

struct OracleComparison {
  double lambda = 0.0;
  double continuous_objective = 0.0;
  double grid_objective = 0.0;
  /// grid - continuous.
  double gap = 0.0;
  /// snapped - continuous, an upper bound for the gap.
  double gap_bound = 0.0;
  double grid_kkt_residual = 0.0;
  bool dominance = false;
  bool within_bound = false;
  Json document;
};

OracleComparison run_oracle_compare(const ExperimentConfig& config, double lambda,
                                    const GridDictionary* dictionary = nullptr);

struct ScenarioCheck {
  std::string path;
  bool pass = false;
  std::string detail;
};

struct ScenarioResult {
  std::string name;
  bool pass = false;
  /// Set when a step failed outright.
  std::string error;
  std::vector<ScenarioCheck> checks;
  Json outcome;
};

/// Runs certify, sweep (when configured) and oracle-compare for
/// `<dir>/config`, writes the outputs under `<out_dir>/<name>/` and checks
/// the outcome against `<dir>/expected.json`.
ScenarioResult run_scenario(const std::string& dir, const RunOptions& options);

/// Evaluates one expected-value check against an outcome document. The check
/// names a JSON pointer `path` and one of `equals`, `min`/`max`,
/// `contains_any`, `all_min`/`all_max`.
ScenarioCheck evaluate_check(const Json& outcome, const Json& check);

}  // namespace sparsecert
