#include "sparsecert/nnls.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

namespace sparsecert {
namespace {

struct SupportSolve {
  bool ok = false;
  Eigen::VectorXd s;
  Eigen::VectorXd residual;
};

// Unconstrained minimizer of 1/2||A_P s - z||^2 + 1^T s restricted to the
// columns in `support`. With A_P Pi = Q R the normal equations reduce to
// R Pi^T s = Q^T z - R^{-T} 1 and the residual is Q [R^{-T} 1; (Q^T z)_tail].
SupportSolve solve_support(const Eigen::MatrixXd& A, const Eigen::VectorXd& z,
                           const std::vector<int>& support) {
  SupportSolve out;
  const int k = static_cast<int>(support.size());
  if (k == 0) {
    out.ok = true;
    out.residual = z;
    return out;
  }
  if (k > A.rows()) return out;
  Eigen::MatrixXd AP(A.rows(), k);
  for (int i = 0; i < k; ++i) AP.col(i) = A.col(support[i]);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(AP);
  const Eigen::MatrixXd& packed = qr.matrixQR();
  const double top = std::abs(packed(0, 0));
  if (top == 0.0 || std::abs(packed(k - 1, k - 1)) <= 1e-13 * top) return out;

  const auto R = packed.topLeftCorner(k, k).triangularView<Eigen::Upper>();
  Eigen::VectorXd qtz = qr.householderQ().adjoint() * z;
  Eigen::VectorXd v = R.adjoint().solve(Eigen::VectorXd::Ones(k));
  Eigen::VectorXd t = R.solve(qtz.head(k) - v);
  out.s = qr.colsPermutation() * t;
  qtz.head(k) = v;
  out.residual = qr.householderQ() * qtz;
  out.ok = true;
  return out;
}

}  // namespace

PenalizedNnlsResult solve_penalized_nnls(const Eigen::MatrixXd& A, const Eigen::VectorXd& z,
                                         double tol, int max_iterations) {
  const int n = static_cast<int>(A.cols());
  if (max_iterations < 0) max_iterations = 3 * n + 30;

  PenalizedNnlsResult result;
  result.solution = Eigen::VectorXd::Zero(n);
  result.residual = z;

  std::vector<char> in_support(n, 0), excluded(n, 0);
  std::vector<int> support;
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);

  auto drop_index = [&](int j) {
    in_support[j] = 0;
    support.erase(std::find(support.begin(), support.end(), j));
  };

  while (result.iterations < max_iterations) {
    ++result.iterations;
    const Eigen::VectorXd w = A.transpose() * result.residual - Eigen::VectorXd::Ones(n);
    int best = -1;
    for (int j = 0; j < n; ++j) {
      if (in_support[j] || excluded[j]) continue;
      if (best < 0 || w(j) > w(best)) best = j;
    }
    if (best < 0 || w(best) <= tol) {
      result.converged = true;
      break;
    }

    support.push_back(best);
    in_support[best] = 1;
    bool first = true;
    while (true) {
      SupportSolve sol = solve_support(A, z, support);
      if (!sol.ok) {
        // Only the entering column can make the support dependent.
        if (!in_support[best]) break;
        drop_index(best);
        excluded[best] = 1;
        result.excluded.push_back(best);
        break;
      }
      const int k = static_cast<int>(support.size());
      if (first) {
        first = false;
        const auto pos = std::find(support.begin(), support.end(), best) - support.begin();
        if (sol.s(pos) <= 0.0) {
          drop_index(best);
          excluded[best] = 1;
          result.excluded.push_back(best);
          break;
        }
      }
      bool feasible = true;
      for (int i = 0; i < k; ++i) feasible = feasible && sol.s(i) > 0.0;
      if (feasible) {
        for (int i = 0; i < k; ++i) mu(support[i]) = sol.s(i);
        result.residual = sol.residual;
        break;
      }
      double alpha = 1.0;
      int blocking = -1;
      for (int i = 0; i < k; ++i) {
        if (sol.s(i) <= 0.0) {
          const double m = mu(support[i]);
          const double ratio = m / (m - sol.s(i));
          if (blocking < 0 || ratio < alpha) {
            alpha = ratio;
            blocking = i;
          }
        }
      }
      std::vector<int> keep;
      for (int i = 0; i < k; ++i) {
        const int j = support[i];
        mu(j) += alpha * (sol.s(i) - mu(j));
        if (i == blocking || mu(j) <= 0.0) {
          mu(j) = 0.0;
          in_support[j] = 0;
        } else {
          keep.push_back(j);
        }
      }
      support = keep;
      if (support.empty()) {
        result.residual = z;
        break;
      }
    }
  }

  result.solution = mu;
  // Recompute the residual from the final support for consistency.
  if (!support.empty()) {
    const SupportSolve sol = solve_support(A, z, support);
    if (sol.ok) result.residual = sol.residual;
  } else {
    result.residual = z;
  }
  const Eigen::VectorXd w = A.transpose() * result.residual - Eigen::VectorXd::Ones(n);
  double kkt = 0.0;
  for (int j = 0; j < n; ++j) {
    if (excluded[j]) continue;
    kkt = std::max(kkt, mu(j) > 0.0 ? std::abs(w(j)) : std::max(0.0, w(j)));
  }
  result.kkt_residual = kkt;
  std::sort(result.excluded.begin(), result.excluded.end());
  return result;
}

}  // namespace sparsecert
