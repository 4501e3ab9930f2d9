#include "sparsecert/certify.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "sparsecert/lmo.hpp"

namespace sparsecert {
namespace {

// Points at distance `radius` from `center` in the coordinate metric
// (L1 over the parameters), clipped to the parameter space.
std::vector<ExtremePoint> ball_boundary(const Setting& setting, const ExtremePoint& center,
                                        double radius, int samples) {
  std::vector<ExtremePoint> out;
  const Eigen::VectorXd c = parameters(center);
  if (setting.kind == SettingKind::RadonTV) {
    for (double s : {-1.0, 1.0}) {
      Eigen::VectorXd t(1);
      t(0) = wrap_unit(c(0) + s * radius);
      out.push_back(with_parameters(center, t));
    }
    return out;
  }
  const double lo = setting.margin, hi = 1.0 - setting.margin;
  for (int k = 0; k < 4 * samples; ++k) {
    // Walk the diamond |u| + |v| = radius.
    const double phase = static_cast<double>(k) / samples;
    const int side = static_cast<int>(phase);
    const double f = phase - side;
    const double us[4] = {1.0 - f, -f, -(1.0 - f), f};
    const double vs[4] = {f, 1.0 - f, -f, -(1.0 - f)};
    Eigen::VectorXd t = c;
    t(0) += radius * us[side];
    t(1) += radius * vs[side];
    if (setting.kind == SettingKind::BVIndicator) {
      if (t(0) < lo || t(1) > hi || t(1) - t(0) <= 1e-9) continue;
    } else {
      t(0) = wrap_unit(t(0));
      t(1) = wrap_unit(t(1));
    }
    out.push_back(with_parameters(center, t));
  }
  return out;
}

AtomMargins atom_margins(const CertificateFunction& eta, const ExtremePoint& e) {
  AtomMargins m;
  m.atom = e;
  const PairingDerivatives d = eta.derivatives(e);
  m.value = d.value;
  m.saturation_error = std::abs(d.value - 1.0);
  m.degenerate = d.degenerate;
  switch (kind_of(e)) {
    case SettingKind::RadonTV:
      m.curvature_margins = {-d.hessian(0, 0)};
      break;
    case SettingKind::BVIndicator:
      // hessian = diag(-sigma/2 eta'(a), sigma/2 eta'(b)).
      m.curvature_margins = {-2.0 * d.hessian(0, 0), -2.0 * d.hessian(1, 1)};
      break;
    case SettingKind::PairedWasserstein: {
      const HessianMargins h = hessian_margins(d.hessian);
      m.hessian_eigenvalues = {h.eigenvalues[0], h.eigenvalues[1]};
      m.curvature_margins = {h.margins[0], h.margins[1]};
      m.hessian_trace = h.trace;
      m.hessian_det = h.det;
      break;
    }
  }
  return m;
}

}  // namespace

HessianMargins hessian_margins(const Eigen::Matrix2d& hessian) {
  const Eigen::Matrix2d sym = 0.5 * (hessian + hessian.transpose());
  const Eigen::Vector2d lam = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(sym).eigenvalues();
  HessianMargins h;
  h.eigenvalues[0] = lam(0);
  h.eigenvalues[1] = lam(1);
  h.margins[0] = -lam(1);
  h.margins[1] = -lam(0);
  h.trace = sym.trace();
  h.det = sym.determinant();
  h.negative_definite = h.trace < 0.0 && h.det > 0.0;
  return h;
}

std::vector<ExtremePoint> extreme_critical_set(const CertificateFunction& eta, double tol,
                                               const CriticalSetOptions& options) {
  const ScanTable table(eta, options.resolution);
  const double floor = 1.0 - std::max(tol, options.coarse_slack);
  std::vector<Candidate> found;
  for (const Candidate& c : table.local_maxima()) {
    if (c.value < floor) break;
    const Candidate p = polish(eta, c, options.newton_steps, 2.0 * table.cell());
    if (std::abs(p.value - 1.0) <= tol) found.push_back(p);
  }
  std::stable_sort(found.begin(), found.end(), [](const Candidate& a, const Candidate& b) {
    if (a.value != b.value) return a.value > b.value;
    return atom_less(a.atom, b.atom);
  });
  std::vector<ExtremePoint> out;
  const double radius = 2.0 * table.cell();
  for (const Candidate& c : found) {
    bool duplicate = false;
    for (const ExtremePoint& e : out) duplicate = duplicate || atom_distance(e, c.atom) <= radius;
    if (!duplicate) out.push_back(c.atom);
  }
  std::sort(out.begin(), out.end(), atom_less);
  return out;
}

MndscReport check_mndsc(const SparseElement& u0, const CertificateFunction& eta, double epsilon,
                        const MndscOptions& options) {
  if (u0.empty()) throw DomainError("ground truth must have at least one atom");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(u0.setting() == eta.setting())) throw DomainError("setting mismatch");

  MndscReport report;
  report.setting = u0.setting();
  report.epsilon = epsilon;
  report.sat_tol = options.sat_tol;
  report.margin_tol = options.margin_tol;
  for (const Atom& a : u0.atoms()) {
    report.atoms.push_back(a.point);
    report.per_atom.push_back(atom_margins(eta, a.point));
  }

  const Region outside = [&](const ExtremePoint& e) {
    for (const ExtremePoint& a : report.atoms) {
      if (atom_distance(e, a) <= epsilon) return false;
    }
    return true;
  };
  const ScanTable table(eta, options.resolution);
  std::vector<Candidate> cands = table.local_maxima(outside);
  if (static_cast<int>(cands.size()) > options.candidates) cands.resize(options.candidates);
  for (const ExtremePoint& a : report.atoms) {
    for (const ExtremePoint& b : ball_boundary(report.setting, a, epsilon * (1.0 + 1e-9),
                                               options.boundary_samples)) {
      if (outside(b)) cands.push_back({b, eta.pairing(b)});
    }
  }
  bool have = false;
  Candidate best;
  for (const Candidate& c : cands) {
    const Candidate p = polish(eta, c, options.newton_steps, 2.0 * table.cell(), outside);
    if (!have || p.value > best.value || (p.value == best.value && atom_less(p.atom, best.atom))) {
      best = p;
      have = true;
    }
  }
  if (have) {
    report.value_margin = 1.0 - best.value;
    report.value_margin_argmax = best.atom;
  } else {
    report.value_margin = 1.0;
    report.notes.push_back("the epsilon-balls cover the whole parameter space");
  }

  bool fail_ii = !(report.value_margin > options.margin_tol);
  bool fail_iii = false;
  for (const AtomMargins& m : report.per_atom) {
    fail_ii = fail_ii || m.saturation_error > options.sat_tol;
    for (double c : m.curvature_margins) fail_iii = fail_iii || !(c > options.margin_tol);
    if (m.degenerate) {
      fail_iii = true;
      report.notes.push_back("paired atom on the kink x = x_bar: Hessian chart is degenerate");
    }
  }
  if (fail_ii) report.failing_clauses.push_back("ii");
  if (fail_iii) report.failing_clauses.push_back("iii");
  report.notes.push_back("clause (i), the source condition, is assumed");
  report.pass = report.failing_clauses.empty();
  return report;
}

}  // namespace sparsecert
