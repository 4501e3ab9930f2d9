#include "sparsecert/primal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "conic_fit.hpp"
#include "sparsecert/dual.hpp"
#include "sparsecert/nnls.hpp"

namespace sparsecert {

namespace detail {

Eigen::MatrixXd weighted_columns(const ForwardModel& model,
                                 const std::vector<ExtremePoint>& atoms) {
  const double w = std::sqrt(model.grid().weight());
  const Eigen::Index rows = static_cast<Eigen::Index>(model.channels()) * model.grid().size();
  Eigen::MatrixXd A(rows, static_cast<Eigen::Index>(atoms.size()));
  for (std::size_t i = 0; i < atoms.size(); ++i) A.col(i) = w * model.column(atoms[i]).values();
  return A;
}

ConicFit conic_fit(const ForwardModel& model, const std::vector<ExtremePoint>& atoms,
                   const Observation& y, double lambda) {
  const double w = std::sqrt(model.grid().weight());
  const Eigen::MatrixXd A = weighted_columns(model, atoms);
  const Eigen::VectorXd z = (w / lambda) * y.values();
  const PenalizedNnlsResult r = solve_penalized_nnls(A, z);
  ConicFit out;
  out.mu = r.solution;
  out.p = model.make_signal(r.residual / w);
  out.kkt_residual = r.kkt_residual;
  out.excluded = r.excluded;
  return out;
}

}  // namespace detail

namespace {

constexpr double kSlideMaxStep = 0.01;

struct State {
  std::vector<ExtremePoint> atoms;
  Eigen::VectorXd coefs;
  DualVariable p;
  double objective = 0.0;
};

class Solver {
 public:
  Solver(const ForwardModel& model, const Observation& y, double lambda, const SolveOptions& options)
      : model_(model), y_(y), lambda_(lambda), options_(options) {}

  State evaluate(std::vector<ExtremePoint> atoms) const {
    detail::ConicFit fit = detail::conic_fit(model_, atoms, y_, lambda_);
    std::vector<ExtremePoint> kept;
    std::vector<double> coefs;
    bool refit = false;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double c = lambda_ * fit.mu(static_cast<Eigen::Index>(i));
      if (c > options_.prune_tol) {
        kept.push_back(atoms[i]);
        coefs.push_back(c);
      } else if (c > 0.0) {
        refit = true;
      }
    }
    State s;
    if (refit) {
      fit = detail::conic_fit(model_, kept, y_, lambda_);
      s.coefs = lambda_ * fit.mu;
    } else {
      s.coefs = Eigen::Map<const Eigen::VectorXd>(coefs.data(), static_cast<Eigen::Index>(coefs.size()));
    }
    s.atoms = std::move(kept);
    s.p = fit.p;
    s.objective = 0.5 * lambda_ * lambda_ * inner(s.p, s.p) + lambda_ * s.coefs.sum();
    return s;
  }

  State slide(State state) const {
    const Setting& setting = model_.setting();
    const int d = setting.parameter_count();
    const double w = std::sqrt(model_.grid().weight());
    for (int it = 0; it < options_.sliding_iters && !state.atoms.empty(); ++it) {
      const int n = static_cast<int>(state.atoms.size());
      const CertificateFunction eta = model_.certificate(state.p);
      const Eigen::MatrixXd A = detail::weighted_columns(model_, state.atoms);
      Eigen::MatrixXd J(A.rows(), n * d);
      Eigen::VectorXd g(n * d);
      Eigen::MatrixXd Hdiag = Eigen::MatrixXd::Zero(n * d, n * d);
      Eigen::MatrixXd Fct = Eigen::MatrixXd::Zero(n, n * d);
      Eigen::VectorXd theta(n * d);
      for (int i = 0; i < n; ++i) {
        const double c = state.coefs(i);
        const PairingDerivatives pd = eta.derivatives(state.atoms[i]);
        J.middleCols(i * d, d) = (c * w) * model_.column_jacobian(state.atoms[i]);
        g.segment(i * d, d) = -lambda_ * c * pd.gradient;
        Hdiag.block(i * d, i * d, d, d) = -lambda_ * c * pd.hessian;
        Fct.block(i, i * d, 1, d) = -lambda_ * pd.gradient.transpose();
        theta.segment(i * d, d) = parameters(state.atoms[i]);
      }
      Fct += A.transpose() * J;
      Eigen::MatrixXd H = J.transpose() * J + Hdiag;
      const Eigen::LDLT<Eigen::MatrixXd> G(A.transpose() * A);
      H -= Fct.transpose() * G.solve(Fct);
      H = 0.5 * (H + H.transpose());

      if (setting.kind == SettingKind::BVIndicator) {
        const double lo = setting.margin, hi = 1.0 - setting.margin;
        for (int k = 0; k < n * d; ++k) {
          const bool pinned = (theta(k) <= lo && g(k) > 0.0) || (theta(k) >= hi && g(k) < 0.0);
          if (pinned) {
            g(k) = 0.0;
            H.row(k).setZero();
            H.col(k).setZero();
            H(k, k) = 1.0;
          }
        }
      }
      const double gnorm = g.norm();
      if (gnorm == 0.0) break;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
      const Eigen::VectorXd lam = eig.eigenvalues();
      const double floor = std::max(1e-10 * lam.cwiseAbs().maxCoeff(), gnorm / kSlideMaxStep);
      Eigen::VectorXd step = Eigen::VectorXd::Zero(n * d);
      for (int k = 0; k < n * d; ++k) {
        const Eigen::VectorXd v = eig.eigenvectors().col(k);
        step -= v * (v.dot(g) / std::max(std::abs(lam(k)), floor));
      }
      const double inf = step.lpNorm<Eigen::Infinity>();
      if (inf > kSlideMaxStep) step *= kSlideMaxStep / inf;

      bool accepted = false;
      double t = 1.0;
      for (int half = 0; half < 40; ++half, t *= 0.5) {
        std::vector<ExtremePoint> moved;
        bool valid = true;
        for (int i = 0; i < n && valid; ++i) {
          Eigen::VectorXd ti = theta.segment(i * d, d) + t * step.segment(i * d, d);
          if (setting.kind == SettingKind::BVIndicator) {
            const double lo = setting.margin, hi = 1.0 - setting.margin;
            ti(0) = std::clamp(ti(0), lo, hi);
            ti(1) = std::clamp(ti(1), lo, hi);
            valid = ti(1) - ti(0) >= 1e-9;
          } else {
            for (int k = 0; k < d; ++k) ti(k) = wrap_unit(ti(k));
          }
          moved.push_back(with_parameters(state.atoms[i], ti));
        }
        if (!valid) continue;
        State next = evaluate(std::move(moved));
        if (next.objective < state.objective) {
          state = std::move(next);
          accepted = true;
          break;
        }
      }
      if (!accepted || t * step.lpNorm<Eigen::Infinity>() < 1e-13) break;
    }
    return state;
  }

  State merge(State state) const {
    const double radius = options_.effective_merge_radius();
    const Setting& setting = model_.setting();
    for (int round = 0; round < 16; ++round) {
      const int n = static_cast<int>(state.atoms.size());
      int bi = -1, bj = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const double dist = atom_distance(state.atoms[i], state.atoms[j]);
          if (dist <= radius && dist < best) {
            best = dist;
            bi = i;
            bj = j;
          }
        }
      }
      if (bi < 0) break;
      const double ci = state.coefs(bi), cj = state.coefs(bj);
      const Eigen::VectorXd ti = parameters(state.atoms[bi]), tj = parameters(state.atoms[bj]);
      Eigen::VectorXd merged = ti;
      for (Eigen::Index k = 0; k < ti.size(); ++k) {
        const double delta = setting.on_torus() ? torus_delta(tj(k), ti(k)) : tj(k) - ti(k);
        merged(k) = ti(k) + cj / (ci + cj) * delta;
        if (setting.on_torus()) merged(k) = wrap_unit(merged(k));
      }
      std::vector<ExtremePoint> atoms = state.atoms;
      atoms[bi] = with_parameters(atoms[bi], merged);
      atoms.erase(atoms.begin() + bj);
      State candidate = evaluate(std::move(atoms));
      if (options_.sliding) candidate = slide(std::move(candidate));
      if (candidate.objective > state.objective + 1e-12 * (1.0 + std::abs(state.objective))) break;
      state = std::move(candidate);
    }
    return state;
  }

 private:
  const ForwardModel& model_;
  const Observation& y_;
  double lambda_;
  SolveOptions options_;
};

}  // namespace

void SolveOptions::validate() const {
  if (max_iters < 1) throw DomainError("max_iters must be >= 1");
  if (!(stop_tol > 0.0)) throw DomainError("stop_tol must be positive");
  if (lmo_grid < 64) throw DomainError("lmo_grid must be >= 64");
  if (newton_steps < 0) throw DomainError("newton_steps must be >= 0");
  if (sliding_iters < 0) throw DomainError("sliding_iters must be >= 0");
  if (!(prune_tol > 0.0)) throw DomainError("prune_tol must be positive");
}

FitResult fully_corrective_fit(const ForwardModel& model, const std::vector<ExtremePoint>& atoms,
                               const Observation& y, double lambda) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const detail::ConicFit fit = detail::conic_fit(model, atoms, y, lambda);
  return {lambda * fit.mu, fit.kkt_residual, fit.excluded};
}

double primal_objective(const ForwardModel& model, const SparseElement& u, const Observation& y,
                        double lambda) {
  const Observation r = model.apply(u) - y;
  return 0.5 * inner(r, r) + lambda * g_value(u);
}

SolveResult solve(const ForwardModel& model, const Observation& y, double lambda,
                  const SolveOptions& options) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  options.validate();
  const Solver solver(model, y, lambda, options);
  const LmoOptions lmo_opts = options.lmo_options();

  SolveResult result;
  State state = solver.evaluate({});
  result.objective_history.push_back(state.objective);
  double sup = 0.0;
  bool checked = false;
  int stalls = 0;
  for (int iter = 1; iter <= options.max_iters; ++iter) {
    const LmoResult l = lmo(model, state.p, lmo_opts);
    sup = l.value;
    checked = true;
    if (sup <= 1.0 + options.stop_tol) {
      result.converged = true;
      break;
    }
    result.iterations = iter;
    std::vector<ExtremePoint> atoms = state.atoms;
    atoms.push_back(l.atom);
    State next = solver.evaluate(std::move(atoms));
    if (options.sliding) next = solver.slide(std::move(next));
    next = solver.merge(std::move(next));
    checked = false;
    if (next.objective < state.objective) {
      const double decrease = state.objective - next.objective;
      stalls = decrease <= 1e-15 * std::abs(state.objective) ? stalls + 1 : 0;
      state = std::move(next);
    } else {
      ++stalls;
    }
    result.objective_history.push_back(state.objective);
    if (stalls >= 3) break;
  }
  if (!checked) {
    sup = lmo(model, state.p, lmo_opts).value;
    result.converged = sup <= 1.0 + options.stop_tol;
  }

  std::vector<Atom> list;
  for (std::size_t i = 0; i < state.atoms.size(); ++i) {
    list.push_back({state.coefs(static_cast<Eigen::Index>(i)), state.atoms[i]});
  }
  result.element = SparseElement(model.setting(), list);
  result.residual = model.apply(result.element) - y;
  result.objective = 0.5 * inner(result.residual, result.residual) + lambda * g_value(result.element);
  result.dual_variable = (-1.0 / lambda) * result.residual;
  result.certificate_sup = sup;
  const DualVariable feasible = (1.0 / std::max(1.0, sup)) * result.dual_variable;
  result.duality_gap = result.objective - dual_objective(y, feasible, lambda);
  return result;
}

}  // namespace sparsecert
