#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsecert/certify.hpp"
#include "sparsecert/domain.hpp"
#include "sparsecert/dual.hpp"
#include "sparsecert/forward.hpp"
#include "sparsecert/kernels.hpp"
#include "sparsecert/oracle.hpp"
#include "sparsecert/primal.hpp"
#include "sparsecert/recovery.hpp"

namespace sparsecert {

using Json = nlohmann::json;

/// Malformed or invalid experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr const char* kFormatVersion = "1";

struct CertifyConfig {
  /// Radius of the balls excluded from the exclusivity scan.
  double epsilon = 0.02;
  std::vector<double> lambda_sequence = default_lambda_sequence();
  double feas_tol = 1e-8;
  int max_cuts = 400;
  double cert_tol = 1e-5;
  double sat_tol = 1e-4;
  double margin_tol = 1e-6;
};

struct SweepSection {
  /// Unset means 0.5 * value_margin / ||K*||, from a certify run.
  std::optional<double> alpha;
  double lambda0 = 1e-2;
  std::vector<double> lambda_grid;
  std::vector<double> noise_fractions;
  std::vector<std::uint64_t> seeds;
  std::uint64_t seed = 0;
  double epsilon_match = 0.02;
  GuaranteedRegion guaranteed;
};

struct OracleSection {
  /// Non-positive means the per-setting default.
  int resolution = -1;
};

struct ExperimentConfig {
  std::string format_version = kFormatVersion;
  Setting setting;
  std::vector<Kernel> kernels;
  int grid_size = 512;
  SparseElement truth{Setting{}};
  SolveOptions solver;
  CertifyConfig certify;
  std::optional<SweepSection> sweep;
  OracleSection oracle;
  std::string output_dir = ".";

  ForwardModel model() const;
  /// Throws ConfigError.
  void validate() const;
};

/// Strict parse: unknown keys, missing required keys and out-of-range values
/// raise ConfigError.
ExperimentConfig parse_config(const Json& doc);
ExperimentConfig load_config(const std::string& path);
Json to_json(const ExperimentConfig& config);

Json to_json(const ExtremePoint& e);
ExtremePoint extreme_point_from_json(const Json& doc, const Setting& setting);
Json to_json(const SparseElement& u);
Json to_json(const Kernel& k);
Kernel kernel_from_json(const Json& doc);

Json solution_json(const SolveResult& r, double lambda);
Json mndsc_json(const MndscReport& report, const CertificateEstimate* estimate);
Json sweep_summary_json(const SweepSummary& summary, const SweepConfig& config, bool timing);

/// %.17g; non-finite values print as nan, inf, -inf.
std::string format_double(double v);

/// CSV of t and eta, eta', eta'' per channel on n points of [0, 1).
std::string certificate_csv(const CertificateFunction& eta, int n = 2048);

inline constexpr const char* kSweepCsvHeader =
    "lambda,noise_norm,seed,count,matched,max_param_err,max_coef_err,cert_sup,gap,wall_ms";
/// One row per record; wall_ms is written as 0 when `timing` is off.
std::string sweep_csv(const std::vector<SweepRecord>& records, bool timing);

/// lambda x noise fraction grid, a cell is green when every seed matched.
std::string phase_svg(const SweepSummary& summary, const SweepConfig& config);
/// max parameter and coefficient errors over seeds against lambda, log-log.
std::string errors_svg(const SweepSummary& summary, const SweepConfig& config);

/// Writes `text` to `path`, creating parent directories. Throws
/// std::runtime_error on failure.
void write_text(const std::string& path, const std::string& text);
std::string dump_json(const Json& doc);

}  // namespace sparsecert
