#pragma once

#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "sparsecert/domain.hpp"
#include "sparsecert/forward.hpp"

namespace sparsecert {

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Extreme points restricted to a finite grid, with their columns Ke.
/// TV: N positions i/N times two signs. BV: endpoint pairs i < j of N points
/// spanning [margin, 1 - margin], times two signs. Paired: all N^2 ordered
/// pairs (i/N, j/N).
struct GridDictionary {
  Setting setting;
  int resolution = 0;
  std::vector<ExtremePoint> atoms;
  /// One column per atom, samples stacked over channels.
  Eigen::MatrixXd columns;
  double weight = 0.0;
};

/// 1024 (TV), 64 (BV), 96 (paired).
int default_grid_resolution(SettingKind kind);

GridDictionary make_grid_dictionary(const ForwardModel& model, int resolution = -1);

/// Index of the grid atom closest in atom_distance (same sign).
int nearest_grid_atom(const GridDictionary& dict, const ExtremePoint& e);

struct GridSolveOptions {
  double kkt_tol = 1e-9;
  /// Coordinate updates, summed over all passes.
  long max_updates = 2'000'000'000L;
};

struct GridSolution {
  Eigen::VectorXd coefficients;
  double objective = 0.0;
  /// Max over columns of the violation of the KKT conditions on
  /// g_j = (A_j, Ac - y) + lambda.
  double kkt_residual = 0.0;
  long updates = 0;
  SparseElement element{Setting{}};
};

/// min_{c >= 0} 1/2 ||A c - y||^2 + lambda sum c by cyclic coordinate descent.
/// Full passes over the dictionary pick a working set of violators; the
/// working set is then swept with its Gram matrix until its KKT residual is
/// below tolerance. Throws OracleError when the update budget runs out.
GridSolution solve_grid(const Observation& y, double lambda, const GridDictionary& dict,
                        const GridSolveOptions& options = {});

/// Objective of the best grid element supported on the atoms of `u` snapped to
/// their nearest grid atoms. It bounds the grid optimum from above, so
/// (snapped - continuous) bounds the grid gap.
double snapped_grid_objective(const ForwardModel& model, const GridDictionary& dict,
                              const SparseElement& u, const Observation& y, double lambda);

}  // namespace sparsecert
