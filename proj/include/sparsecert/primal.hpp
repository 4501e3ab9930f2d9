#pragma once

#include <vector>

#include <Eigen/Core>

#include "sparsecert/domain.hpp"
#include "sparsecert/forward.hpp"
#include "sparsecert/lmo.hpp"

namespace sparsecert {

struct SolveOptions {
  int max_iters = 100;
  /// Stop once sup_e <K*p, e> <= 1 + stop_tol.
  double stop_tol = 1e-9;
  int lmo_grid = 256;
  int newton_steps = 30;
  bool sliding = true;
  int sliding_iters = 60;
  double prune_tol = kPruneThreshold;
  /// Negative means 2 / lmo_grid.
  double merge_radius = -1.0;

  double effective_merge_radius() const { return merge_radius < 0.0 ? 2.0 / lmo_grid : merge_radius; }
  LmoOptions lmo_options() const { return {lmo_grid, newton_steps, 8}; }
  /// Throws DomainError on out-of-range fields.
  void validate() const;
};

struct FitResult {
  /// One nonnegative coefficient per input atom.
  Eigen::VectorXd coefficients;
  /// Max KKT violation, in units of the certificate value.
  double kkt_residual = 0.0;
  /// Indices dropped as numerically dependent on the others.
  std::vector<int> excluded;
};

/// min_{c >= 0} 1/2 ||sum c_i Ke_i - y||^2 + lambda sum c_i.
FitResult fully_corrective_fit(const ForwardModel& model, const std::vector<ExtremePoint>& atoms,
                               const Observation& y, double lambda);

struct SolveResult {
  SparseElement element{Setting{}};
  /// Ku - y.
  Observation residual;
  double objective = 0.0;
  /// -residual / lambda.
  DualVariable dual_variable;
  double certificate_sup = 0.0;
  /// Primal objective minus the dual objective of dual_variable scaled into
  /// the feasible set (divided by max(1, certificate_sup)).
  double duality_gap = 0.0;
  int iterations = 0;
  bool converged = false;
  /// Objective after each outer iteration, starting with the empty element.
  std::vector<double> objective_history;
};

double primal_objective(const ForwardModel& model, const SparseElement& u, const Observation& y,
                        double lambda);

/// Fully corrective conditional gradient for
///   min_u 1/2 ||Ku - y||^2 + lambda G(u).
SolveResult solve(const ForwardModel& model, const Observation& y, double lambda,
                  const SolveOptions& options = {});

}  // namespace sparsecert
