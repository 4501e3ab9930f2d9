#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "sparsecert/domain.hpp"
#include "sparsecert/forward.hpp"
#include "sparsecert/lmo.hpp"

namespace sparsecert {

/// lambda (y, p) - lambda^2/2 ||p||^2.
double dual_objective(const Observation& y, const DualVariable& p, double lambda);

/// sup over the extreme points of <K*p, e>; p is dual feasible iff <= 1.
double feasibility_sup(const ForwardModel& model, const DualVariable& p,
                       const LmoOptions& options = {});

struct DualOptions {
  double feas_tol = 1e-8;
  int max_cuts = 400;
  LmoOptions lmo;
};

struct DualResult {
  DualVariable p;
  double objective = 0.0;
  double feasibility_sup = 0.0;
  int cuts_used = 0;
  /// Working set of cuts; `multipliers` are the matching nonnegative
  /// multipliers, p = y/lambda - sum mu_k K e_k.
  std::vector<ExtremePoint> cuts;
  Eigen::VectorXd multipliers;
};

class DualSolveError : public std::runtime_error {
 public:
  DualSolveError(const std::string& what, DualResult best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const DualResult& best() const { return best_; }

 private:
  DualResult best_;
};

/// Projection of y/lambda onto {p : <K*p, e> <= 1 for all extreme points e}
/// by the exchange method: project onto finitely many cuts, add the most
/// violated extreme point, repeat. Cuts are never dropped. `warm_cuts` seeds
/// the working set.
DualResult solve_dual_projection(const ForwardModel& model, const Observation& y, double lambda,
                                 const DualOptions& options = {},
                                 const std::vector<ExtremePoint>& warm_cuts = {});

struct CertificateEstimate {
  DualVariable p0;
  std::vector<double> lambda_sequence;
  /// ||p_{lambda_k} - p_{lambda_{k+1}}||.
  std::vector<double> cauchy_gaps;
  /// ||p_{lambda_k}||.
  std::vector<double> norms;
  double cert_tol = 1e-5;
  bool converged = false;
};

/// 1e-2 * 2^-k, k = 0..7.
std::vector<double> default_lambda_sequence();

/// Estimates the minimal-norm certificate as the lambda -> 0 limit of the
/// dual projections, warm-starting each solve from the previous cuts.
CertificateEstimate estimate_minimal_norm_certificate(const ForwardModel& model,
                                                      const Observation& y0,
                                                      const std::vector<double>& lambda_sequence,
                                                      const DualOptions& options = {},
                                                      double cert_tol = 1e-5);

}  // namespace sparsecert
