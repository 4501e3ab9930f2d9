#include "sparsecert/dual.hpp"

#include <string>

#include <Eigen/QR>

#include "conic_fit.hpp"

namespace sparsecert {

double dual_objective(const Observation& y, const DualVariable& p, double lambda) {
  return lambda * inner(y, p) - 0.5 * lambda * lambda * inner(p, p);
}

double feasibility_sup(const ForwardModel& model, const DualVariable& p,
                       const LmoOptions& options) {
  return lmo(model, p, options).value;
}

namespace {

struct Refined {
  std::vector<ExtremePoint> cuts;
  Eigen::VectorXd mu;
  DualVariable p;
};

DualVariable projection_residual(const ForwardModel& model, const Observation& y, double lambda,
                                 const std::vector<ExtremePoint>& cuts, const Eigen::VectorXd& mu) {
  DualVariable p = (1.0 / lambda) * y;
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    p -= mu(static_cast<Eigen::Index>(k)) * model.column(cuts[k]);
  }
  return p;
}

// Newton on the KKT system of the active cuts: with p = y/lambda - sum mu_k Ke_k,
// solve <K*p, e_k> = 1 and grad_theta <K*p, e_k> = 0 for (mu_k, theta_k).
// Endpoints pinned at the BV boundary keep their position. Returns false if
// the iteration does not reach a KKT point.
bool refine_active_cuts(const ForwardModel& model, const Observation& y, double lambda,
                        Refined& state) {
  const Setting& setting = model.setting();
  const int d = setting.parameter_count();
  const int n = static_cast<int>(state.cuts.size());
  if (n == 0) return true;
  const double h = model.grid().weight();
  const double lo = setting.margin, hi = 1.0 - setting.margin;

  std::vector<std::vector<int>> free(n);
  for (int k = 0; k < n; ++k) {
    const Eigen::VectorXd th = parameters(state.cuts[k]);
    for (int c = 0; c < d; ++c) {
      const bool pinned = setting.kind == SettingKind::BVIndicator && (th(c) <= lo || th(c) >= hi);
      if (!pinned) free[k].push_back(c);
    }
  }

  auto residual = [&](const Refined& s, bool& degenerate) {
    const CertificateFunction eta = model.certificate(s.p);
    std::vector<double> f;
    degenerate = false;
    for (int k = 0; k < n; ++k) {
      const PairingDerivatives pd = eta.derivatives(s.cuts[k]);
      degenerate = degenerate || pd.degenerate;
      f.push_back(pd.value - 1.0);
      for (int c : free[k]) f.push_back(pd.gradient(c));
    }
    return Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(f.data(), static_cast<Eigen::Index>(f.size())));
  };

  bool degenerate = false;
  Eigen::VectorXd F = residual(state, degenerate);
  if (degenerate) return false;
  for (int it = 0; it < 40 && F.lpNorm<Eigen::Infinity>() > 1e-15; ++it) {
    const CertificateFunction eta = model.certificate(state.p);
    std::vector<Eigen::VectorXd> cols(n);
    std::vector<Eigen::MatrixXd> jacs(n);
    std::vector<PairingDerivatives> pds(n);
    std::vector<int> offset(n + 1, 0);
    for (int k = 0; k < n; ++k) {
      cols[k] = model.column(state.cuts[k]).values();
      jacs[k] = model.column_jacobian(state.cuts[k]);
      pds[k] = eta.derivatives(state.cuts[k]);
      offset[k + 1] = offset[k] + 1 + static_cast<int>(free[k].size());
    }
    const int dim = offset[n];
    Eigen::MatrixXd Jac = Eigen::MatrixXd::Zero(dim, dim);
    for (int k = 0; k < n; ++k) {
      const int rk = offset[k];
      for (int j = 0; j < n; ++j) {
        const int cj = offset[j];
        const double mu_j = state.mu(j);
        // d/d mu_j
        Jac(rk, cj) = -h * cols[k].dot(cols[j]);
        for (std::size_t a = 0; a < free[k].size(); ++a) {
          Jac(rk + 1 + a, cj) = -h * jacs[k].col(free[k][a]).dot(cols[j]);
        }
        // d/d theta_j
        for (std::size_t b = 0; b < free[j].size(); ++b) {
          const int col = cj + 1 + static_cast<int>(b);
          const int pb = free[j][b];
          Jac(rk, col) = -mu_j * h * cols[k].dot(jacs[j].col(pb));
          if (j == k) Jac(rk, col) += pds[k].gradient(pb);
          for (std::size_t a = 0; a < free[k].size(); ++a) {
            const int pa = free[k][a];
            double v = -mu_j * h * jacs[k].col(pa).dot(jacs[j].col(pb));
            if (j == k) v += pds[k].hessian(pa, pb);
            Jac(rk + 1 + a, col) = v;
          }
        }
      }
    }
    const Eigen::VectorXd delta = Jac.colPivHouseholderQr().solve(-F);
    if (!delta.allFinite()) return false;
    bool accepted = false;
    double t = 1.0;
    for (int half = 0; half < 30 && !accepted; ++half, t *= 0.5) {
      Refined trial = state;
      bool valid = true;
      for (int k = 0; k < n && valid; ++k) {
        trial.mu(k) = state.mu(k) + t * delta(offset[k]);
        valid = trial.mu(k) > 0.0;
        Eigen::VectorXd th = parameters(state.cuts[k]);
        for (std::size_t a = 0; a < free[k].size(); ++a) {
          th(free[k][a]) += t * delta(offset[k] + 1 + static_cast<int>(a));
        }
        if (setting.kind == SettingKind::BVIndicator) {
          valid = valid && th(0) >= lo && th(1) <= hi && th(1) - th(0) > 1e-9;
        } else {
          for (int c = 0; c < d; ++c) th(c) = wrap_unit(th(c));
        }
        trial.cuts[k] = with_parameters(state.cuts[k], th);
      }
      if (!valid) continue;
      trial.p = projection_residual(model, y, lambda, trial.cuts, trial.mu);
      bool deg = false;
      const Eigen::VectorXd Ft = residual(trial, deg);
      if (deg) return false;
      if (Ft.norm() < F.norm()) {
        state = std::move(trial);
        F = Ft;
        accepted = true;
      }
    }
    if (!accepted) break;
  }
  return F.lpNorm<Eigen::Infinity>() <= 1e-8;
}

}  // namespace

DualResult solve_dual_projection(const ForwardModel& model, const Observation& y, double lambda,
                                 const DualOptions& options,
                                 const std::vector<ExtremePoint>& warm_cuts) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  std::vector<ExtremePoint> cuts = warm_cuts;
  DualResult result;
  std::string failure;
  // Exchange phase.
  while (true) {
    const detail::ConicFit fit = detail::conic_fit(model, cuts, y, lambda);
    const LmoResult l = lmo(model, fit.p, options.lmo);
    result.p = fit.p;
    result.objective = dual_objective(y, fit.p, lambda);
    result.feasibility_sup = l.value;
    result.cuts = cuts;
    result.cuts_used = static_cast<int>(cuts.size());
    result.multipliers = fit.mu;
    if (l.value <= 1.0 + options.feas_tol) break;
    if (static_cast<int>(cuts.size()) >= options.max_cuts) {
      failure = "dual projection hit the cut limit (" + std::to_string(options.max_cuts) +
                ") with violation " + std::to_string(l.value - 1.0);
      break;
    }
    bool duplicate = false;
    for (const ExtremePoint& c : cuts) duplicate = duplicate || atom_distance(c, l.atom) == 0.0;
    if (duplicate) {
      failure = "dual projection stalled with violation " + std::to_string(l.value - 1.0);
      break;
    }
    cuts.push_back(l.atom);
  }

  // Local phase: lump active cuts that sit on the same bump, then move them
  // onto the maximizers of the certificate.
  Refined refined;
  std::vector<double> masses;
  const double cluster_radius = 4.0 / options.lmo.resolution;
  for (std::size_t k = 0; k < result.cuts.size(); ++k) {
    const double m = result.multipliers(static_cast<Eigen::Index>(k));
    if (!(m > 0.0)) continue;
    bool merged = false;
    for (std::size_t r = 0; r < refined.cuts.size() && !merged; ++r) {
      if (atom_distance(refined.cuts[r], result.cuts[k]) > cluster_radius) continue;
      const Eigen::VectorXd a = parameters(refined.cuts[r]), b = parameters(result.cuts[k]);
      Eigen::VectorXd mid = a;
      for (Eigen::Index c = 0; c < a.size(); ++c) {
        const double delta = model.setting().on_torus() ? torus_delta(b(c), a(c)) : b(c) - a(c);
        mid(c) = a(c) + m / (masses[r] + m) * delta;
        if (model.setting().on_torus()) mid(c) = wrap_unit(mid(c));
      }
      refined.cuts[r] = with_parameters(refined.cuts[r], mid);
      masses[r] += m;
      merged = true;
    }
    if (!merged) {
      refined.cuts.push_back(result.cuts[k]);
      masses.push_back(m);
    }
  }
  refined.mu = Eigen::Map<Eigen::VectorXd>(masses.data(), static_cast<Eigen::Index>(masses.size()));
  refined.p = projection_residual(model, y, lambda, refined.cuts, refined.mu);
  if (!refined.cuts.empty() && refine_active_cuts(model, y, lambda, refined)) {
    const double sup = lmo(model, refined.p, options.lmo).value;
    if (sup <= 1.0 + options.feas_tol) {
      result.cuts.insert(result.cuts.end(), refined.cuts.begin(), refined.cuts.end());
      result.multipliers = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(result.cuts.size()));
      result.multipliers.tail(refined.mu.size()) = refined.mu;
      result.cuts_used = static_cast<int>(result.cuts.size());
      result.p = refined.p;
      result.objective = dual_objective(y, refined.p, lambda);
      result.feasibility_sup = sup;
      return result;
    }
  }
  if (!failure.empty()) throw DualSolveError(failure, std::move(result));
  return result;
}

std::vector<double> default_lambda_sequence() {
  std::vector<double> out;
  double lambda = 1e-2;
  for (int k = 0; k < 8; ++k, lambda *= 0.5) out.push_back(lambda);
  return out;
}

CertificateEstimate estimate_minimal_norm_certificate(const ForwardModel& model,
                                                      const Observation& y0,
                                                      const std::vector<double>& lambda_sequence,
                                                      const DualOptions& options,
                                                      double cert_tol) {
  if (lambda_sequence.size() < 3) throw DomainError("lambda sequence needs at least 3 entries");
  for (std::size_t k = 0; k < lambda_sequence.size(); ++k) {
    if (!(lambda_sequence[k] > 0.0)) throw DomainError("lambda sequence must be positive");
    if (k > 0 && !(lambda_sequence[k] < lambda_sequence[k - 1])) {
      throw DomainError("lambda sequence must be strictly decreasing");
    }
  }
  CertificateEstimate est;
  est.lambda_sequence = lambda_sequence;
  est.cert_tol = cert_tol;
  std::vector<ExtremePoint> cuts;
  DualVariable previous;
  for (std::size_t k = 0; k < lambda_sequence.size(); ++k) {
    const DualResult r = solve_dual_projection(model, y0, lambda_sequence[k], options, cuts);
    cuts = r.cuts;
    est.norms.push_back(norm(r.p));
    if (k > 0) est.cauchy_gaps.push_back(norm(r.p - previous));
    previous = r.p;
  }
  est.p0 = previous;
  est.converged = est.cauchy_gaps.back() <= cert_tol;
  return est;
}

}  // namespace sparsecert
