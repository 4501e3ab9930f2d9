#pragma once

#include <vector>

#include <Eigen/Core>

#include "sparsecert/forward.hpp"

namespace sparsecert::detail {

/// Multipliers mu >= 0 minimizing 1/2 ||y/lambda - sum mu_i Ke_i||^2 + sum mu_i,
/// together with the residual p = y/lambda - sum mu_i Ke_i. The primal fit
/// uses c = lambda mu; the dual projection uses p directly.
struct ConicFit {
  Eigen::VectorXd mu;
  DualVariable p;
  double kkt_residual = 0.0;
  std::vector<int> excluded;
};

/// Columns sqrt(h) Ke_i of the weighted least-squares system.
Eigen::MatrixXd weighted_columns(const ForwardModel& model, const std::vector<ExtremePoint>& atoms);

ConicFit conic_fit(const ForwardModel& model, const std::vector<ExtremePoint>& atoms,
                   const Observation& y, double lambda);

}  // namespace sparsecert::detail
