#pragma once

#include <functional>
#include <vector>

#include "sparsecert/domain.hpp"
#include "sparsecert/forward.hpp"

namespace sparsecert {

struct Candidate {
  ExtremePoint atom;
  double value = 0.0;
};

/// Restricts scans and polishing to a subset of the parameter space. An empty
/// function means everywhere.
using Region = std::function<bool(const ExtremePoint&)>;

/// Tabulated certificate on a uniform scan grid with `resolution` points per
/// parameter dimension. Torus settings use t_i = i/N; BV endpoints use N
/// equispaced points spanning [margin, 1 - margin].
class ScanTable {
 public:
  ScanTable(const CertificateFunction& eta, int resolution);

  int resolution() const { return n_; }
  /// Spacing of the scan grid.
  double cell() const { return cell_; }

  /// All grid local maxima of e -> <eta, e> (8-neighbourhood in 2D, wrapping
  /// on the torus), restricted to `allowed`. Sorted by value, descending,
  /// ties by parameters then sign. Falls back to the best grid cell when no
  /// strict local maximum exists.
  std::vector<Candidate> local_maxima(const Region& allowed = {}) const;

 private:
  double coord(int i) const;
  ExtremePoint atom_at(int i, int j, int sign) const;
  double value_at(int i, int j, int sign) const;

  Setting setting_;
  int n_;
  double cell_;
  std::vector<double> first_;   // eta (TV), primitive (BV) or phi (paired)
  std::vector<double> second_;  // psi (paired)
};

/// Safeguarded Newton ascent on <eta, e> starting from `start`. Eigenvalues
/// of the Hessian are replaced by -|lambda| so every step is an ascent
/// direction; steps are capped at `max_step` per coordinate and halved until
/// the value increases. BV endpoints are kept in [margin, 1 - margin] with
/// a < b, torus coordinates are wrapped.
Candidate polish(const CertificateFunction& eta, const Candidate& start, int newton_steps,
                 double max_step, const Region& allowed = {});

/// Ascent along the paired diagonal x = x_bar, where the pairing is
/// (phi + psi) / 2 and the two-parameter chart is not differentiable.
Candidate polish_diagonal(const CertificateFunction& eta, double x, int newton_steps,
                          double max_step, const Region& allowed = {});

struct LmoOptions {
  int resolution = 256;
  int newton_steps = 30;
  int candidates = 8;
};

struct LmoResult {
  ExtremePoint atom;
  /// max(0, sup over atoms); 0 is attained by the empty element.
  double value = 0.0;
  /// The pairing at `atom` (can be negative when every pairing is).
  double atom_value = 0.0;
};

/// argmax of e -> <K*p, e> over the extreme points: grid scan, then Newton
/// polish of the best few local maxima.
LmoResult lmo(const CertificateFunction& eta, const LmoOptions& options = {});
LmoResult lmo(const ForwardModel& model, const DualVariable& p, const LmoOptions& options = {});

/// Lexicographic order on (parameters, sign); used for deterministic ties.
bool atom_less(const ExtremePoint& a, const ExtremePoint& b);

}  // namespace sparsecert
