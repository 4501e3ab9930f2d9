#pragma once

#include <vector>

#include <Eigen/Core>

namespace sparsecert {

struct PenalizedNnlsResult {
  Eigen::VectorXd solution;
  /// z - A * solution, computed from the orthogonal factor (no cancellation
  /// through ill-conditioned coefficients).
  Eigen::VectorXd residual;
  /// max over j of the KKT violation of a_j^T residual - 1 (<= 0 off the
  /// support, = 0 on it).
  double kkt_residual = 0.0;
  /// Columns dropped because they were numerically dependent on the support.
  std::vector<int> excluded;
  int iterations = 0;
  bool converged = false;
};

/// Lawson-Hanson active set method for
///   min_{mu >= 0} 1/2 ||A mu - z||^2 + sum_j mu_j.
/// Each support subproblem is solved through a column-pivoted Householder QR
/// of the support columns, so only cond(A_P) (not its square) enters.
PenalizedNnlsResult solve_penalized_nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& z,
                                         double tol = 1e-12, int max_iterations = -1);

}  // namespace sparsecert
