#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sparsecert/domain.hpp"
#include "sparsecert/forward.hpp"
#include "sparsecert/primal.hpp"

namespace sparsecert {

/// Standard normal samples from mt19937_64(seed), rescaled so that
/// ||w|| = norm_target exactly. Zero when the target is zero.
Observation make_noise(const SampleGrid& grid, int channels, double norm_target, std::uint64_t seed);

/// Seed of one sweep cell, derived from the global seed and the cell seed.
std::uint64_t mix_seed(std::uint64_t global_seed, std::uint64_t cell_seed);

struct MatchReport {
  bool matched = false;
  int recovered_count = 0;
  int truth_count = 0;
  /// (recovered index, truth index), one per assigned pair, sorted by truth.
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> param_errors;
  std::vector<double> coef_errors;
  /// +inf when nothing could be paired.
  double max_param_err = 0.0;
  double max_coef_err = 0.0;
};

/// Minimum-cost assignment (Hungarian method) on the atom_distance matrix;
/// matched iff the assignment is a bijection with every cost <= epsilon.
MatchReport match_atoms(const SparseElement& recovered, const SparseElement& truth, double epsilon);

/// sup over extreme points of ||Ke||, which is the norm of K* into the
/// continuous functions on the parameter space.
double adjoint_norm_estimate(const ForwardModel& model, int resolution = 256);

/// 0.5 * value_margin / adjoint_norm.
double default_alpha(double value_margin, double adjoint_norm);

/// Smallest eigenvalue of the Gram matrix of the columns K u_0^i.
double gram_min_eigenvalue(const ForwardModel& model, const SparseElement& truth);

/// Cells with lambda_min <= lambda <= lambda_max and noise fraction <=
/// noise_fraction_max must be recovered: matched, coefficient errors below
/// coef_tol, certificate saturation at the recovered atoms below
/// saturation_tol.
struct GuaranteedRegion {
  double lambda_min = 1e-4;
  double lambda_max = 1e-3;
  double noise_fraction_max = 0.5;
  double coef_tol = 0.05;
  double saturation_tol = 1e-6;
};

struct SweepConfig {
  double alpha = 0.0;
  double lambda0 = 1e-2;
  std::vector<double> lambda_grid;
  std::vector<double> noise_fractions;
  std::vector<std::uint64_t> seeds;
  std::uint64_t global_seed = 0;
  double epsilon_match = 0.02;
  SolveOptions solver;
  GuaranteedRegion guaranteed;
  int threads = 1;

  /// Throws DomainError.
  void validate() const;
};

struct SweepRecord {
  double lambda = 0.0;
  double noise_fraction = 0.0;
  double noise_norm = 0.0;
  std::uint64_t seed = 0;
  /// lambda <= lambda0; the noise bound holds by construction.
  bool admissible = false;
  bool guaranteed = false;
  int count = 0;
  bool matched = false;
  double max_param_err = 0.0;
  double max_coef_err = 0.0;
  /// max_i |<eta, u_i> - 1| over the recovered atoms.
  double max_saturation_err = 0.0;
  double cert_sup = 0.0;
  double gap = 0.0;
  bool converged = false;
  double wall_ms = 0.0;
  /// Non-empty when the solve threw.
  std::string error;

  bool recovered(const GuaranteedRegion& region) const;
};

struct SweepSummary {
  std::vector<SweepRecord> records;
  double alpha = 0.0;
  double lambda0 = 0.0;
  double gram_min_eigenvalue = 0.0;
  std::vector<std::string> warnings;
  bool guaranteed_all_recovered = true;
  int guaranteed_cells = 0;
  bool any_errors = false;
};

/// Solves P_lambda(K u0 + w) over the Cartesian product lambda x noise
/// fraction x seed, with ||w|| = fraction * alpha * lambda. Cells run on up
/// to `threads` workers; records come back in grid order.
SweepSummary run_sweep(const ForwardModel& model, const SparseElement& truth,
                       const SweepConfig& config);

}  // namespace sparsecert
