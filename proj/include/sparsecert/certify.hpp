#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sparsecert/domain.hpp"
#include "sparsecert/forward.hpp"

namespace sparsecert {

struct CriticalSetOptions {
  int resolution = 1024;
  int newton_steps = 40;
  /// Grid maxima this far below 1 are still polished.
  double coarse_slack = 0.05;
};

/// Representatives of {e : <eta, e> = 1} up to `tol`: one polished local
/// maximizer per bump, sorted by parameters. tol = 0 asks for exact
/// saturation, which floating point almost never produces; use tol >= 1e-8.
std::vector<ExtremePoint> extreme_critical_set(const CertificateFunction& eta, double tol,
                                               const CriticalSetOptions& options = {});

struct AtomMargins {
  ExtremePoint atom;
  double value = 0.0;
  /// |<eta, e> - 1|.
  double saturation_error = 0.0;
  /// Positive means non-degenerate. Diracs: -sigma eta''(x). Indicators:
  /// sigma eta'(a) and -sigma eta'(b). Paired: minus the eigenvalues of the
  /// pairing Hessian.
  std::vector<double> curvature_margins;
  /// Paired only.
  std::vector<double> hessian_eigenvalues;
  double hessian_trace = 0.0;
  double hessian_det = 0.0;
  bool degenerate = false;
};

struct HessianMargins {
  /// Ascending.
  double eigenvalues[2] = {0.0, 0.0};
  /// Minus the eigenvalues, ascending.
  double margins[2] = {0.0, 0.0};
  double trace = 0.0;
  double det = 0.0;
  /// trace < 0 and det > 0.
  bool negative_definite = false;
};

/// Second-order margins of a symmetric 2x2 pairing Hessian (paired setting).
HessianMargins hessian_margins(const Eigen::Matrix2d& hessian);

struct MndscOptions {
  double sat_tol = 1e-4;
  double margin_tol = 1e-6;
  int resolution = 4096;
  int newton_steps = 40;
  int candidates = 16;
  int boundary_samples = 64;
};

struct MndscReport {
  Setting setting;
  std::vector<ExtremePoint> atoms;
  double epsilon = 0.0;
  /// 1 - sup of <eta, e> over extreme points at distance > epsilon from
  /// every atom.
  double value_margin = 0.0;
  std::optional<ExtremePoint> value_margin_argmax;
  std::vector<AtomMargins> per_atom;
  double sat_tol = 0.0;
  double margin_tol = 0.0;
  /// The source condition is assumed; the certificate estimate's last Cauchy
  /// gap is attached as evidence when known.
  std::optional<double> cauchy_gap;
  bool pass = false;
  /// Subset of {"i", "ii", "iii"}.
  std::vector<std::string> failing_clauses;
  std::vector<std::string> notes;
};

/// Checks saturation, exclusivity and per-setting second-order decay of eta
/// around the atoms of u0.
MndscReport check_mndsc(const SparseElement& u0, const CertificateFunction& eta, double epsilon,
                        const MndscOptions& options = {});

}  // namespace sparsecert
