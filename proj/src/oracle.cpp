#include "sparsecert/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/QR>

#include "sparsecert/primal.hpp"

namespace sparsecert {

int default_grid_resolution(SettingKind kind) {
  switch (kind) {
    case SettingKind::RadonTV:
      return 1024;
    case SettingKind::BVIndicator:
      return 64;
    case SettingKind::PairedWasserstein:
      return 96;
  }
  return 1024;
}

GridDictionary make_grid_dictionary(const ForwardModel& model, int resolution) {
  const Setting& s = model.setting();
  const int n = resolution > 0 ? resolution : default_grid_resolution(s.kind);
  if (n < 2) throw DomainError("grid resolution must be >= 2");
  GridDictionary dict;
  dict.setting = s;
  dict.resolution = n;
  dict.weight = model.grid().weight();
  switch (s.kind) {
    case SettingKind::RadonTV:
      for (int i = 0; i < n; ++i) {
        for (Sign sg : {Sign::Negative, Sign::Positive}) {
          dict.atoms.push_back(SignedDirac{static_cast<double>(i) / n, sg});
        }
      }
      break;
    case SettingKind::BVIndicator: {
      const double lo = s.margin, hi = 1.0 - s.margin;
      auto coord = [&](int i) { return i == n - 1 ? hi : lo + (hi - lo) * i / (n - 1); };
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          for (Sign sg : {Sign::Negative, Sign::Positive}) {
            dict.atoms.push_back(SignedIndicator{coord(i), coord(j), sg});
          }
        }
      }
      break;
    }
    case SettingKind::PairedWasserstein:
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          dict.atoms.push_back(PairedDirac{static_cast<double>(i) / n, static_cast<double>(j) / n});
        }
      }
      break;
  }
  const Eigen::Index rows = static_cast<Eigen::Index>(model.channels()) * model.grid().size();
  dict.columns.resize(rows, static_cast<Eigen::Index>(dict.atoms.size()));
  for (std::size_t k = 0; k < dict.atoms.size(); ++k) {
    dict.columns.col(static_cast<Eigen::Index>(k)) = model.column(dict.atoms[k]).values();
  }
  return dict;
}

int nearest_grid_atom(const GridDictionary& dict, const ExtremePoint& e) {
  int best = -1;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < dict.atoms.size(); ++k) {
    const double d = atom_distance(dict.atoms[k], e);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(k);
    }
  }
  return best;
}

namespace {

double kkt_violation(double c, double g) { return c > 0.0 ? std::abs(g) : std::max(0.0, -g); }

double working_objective(const Eigen::MatrixXd& G, const Eigen::VectorXd& b, double lambda,
                         const Eigen::VectorXd& c) {
  return 0.5 * c.dot(G * c) - b.dot(c) + lambda * c.sum();
}

// Moves the positive coordinates toward the minimizer of the objective on
// their face, as far as nonnegativity allows. Kept only if the objective
// drops; cyclic sweeps stall on nearly parallel columns otherwise.
void face_step(const Eigen::MatrixXd& G, const Eigen::VectorXd& b, double lambda, Eigen::VectorXd& c) {
  std::vector<Eigen::Index> face;
  for (Eigen::Index k = 0; k < c.size(); ++k) {
    if (c(k) > 0.0) face.push_back(k);
  }
  if (face.empty()) return;
  const Eigen::Index f = static_cast<Eigen::Index>(face.size());
  Eigen::MatrixXd Gf(f, f);
  Eigen::VectorXd rhs(f), cf(f);
  for (Eigen::Index i = 0; i < f; ++i) {
    rhs(i) = b(face[i]) - lambda;
    cf(i) = c(face[i]);
    for (Eigen::Index j = 0; j < f; ++j) Gf(i, j) = G(face[i], face[j]);
  }
  const Eigen::VectorXd target = Gf.completeOrthogonalDecomposition().solve(rhs);
  if (!target.allFinite()) return;
  const Eigen::VectorXd d = target - cf;
  double t = 1.0;
  Eigen::Index blocking = -1;
  for (Eigen::Index i = 0; i < f; ++i) {
    if (d(i) < 0.0 && -cf(i) / d(i) < t) {
      t = -cf(i) / d(i);
      blocking = i;
    }
  }
  Eigen::VectorXd trial = c;
  for (Eigen::Index i = 0; i < f; ++i) trial(face[i]) = std::max(0.0, cf(i) + t * d(i));
  if (blocking >= 0) trial(face[blocking]) = 0.0;
  if (working_objective(G, b, lambda, trial) < working_objective(G, b, lambda, c)) c = trial;
}

}  // namespace

GridSolution solve_grid(const Observation& y, double lambda, const GridDictionary& dict,
                        const GridSolveOptions& options) {
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const Eigen::MatrixXd& A = dict.columns;
  if (y.values().size() != A.rows()) throw DomainError("observation shape does not match the dictionary");
  const double h = dict.weight;
  const Eigen::Index n = A.cols();

  GridSolution out;
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd r = -y.values();
  const double inner_tol = 0.1 * options.kkt_tol;
  while (true) {
    const Eigen::VectorXd g = (h * (A.transpose() * r)).array() + lambda;
    double kkt = 0.0;
    std::vector<Eigen::Index> violators;
    std::vector<Eigen::Index> work;
    for (Eigen::Index j = 0; j < n; ++j) {
      const double v = kkt_violation(c(j), g(j));
      kkt = std::max(kkt, v);
      if (c(j) > 0.0) {
        work.push_back(j);
      } else if (v > inner_tol) {
        violators.push_back(j);
      }
    }
    out.kkt_residual = kkt;
    if (kkt <= options.kkt_tol) break;
    // Most violated columns first; a handful per pass keeps the working set small.
    std::sort(violators.begin(), violators.end(), [&](Eigen::Index a, Eigen::Index b) {
      return g(a) < g(b) || (g(a) == g(b) && a < b);
    });
    if (violators.size() > 8) violators.resize(8);
    work.insert(work.end(), violators.begin(), violators.end());
    std::sort(work.begin(), work.end());

    const Eigen::Index w = static_cast<Eigen::Index>(work.size());
    Eigen::MatrixXd AW(A.rows(), w);
    Eigen::VectorXd cw(w);
    for (Eigen::Index k = 0; k < w; ++k) {
      AW.col(k) = A.col(work[k]);
      cw(k) = c(work[k]);
    }
    const Eigen::MatrixXd G = h * (AW.transpose() * AW);
    const Eigen::VectorXd b = h * (AW.transpose() * y.values());
    Eigen::VectorXd gw = G * cw - b;
    gw.array() += lambda;
    for (long sweep = 0;; ++sweep) {
      double worst = 0.0;
      for (Eigen::Index k = 0; k < w; ++k) {
        const double next = std::max(0.0, cw(k) - gw(k) / G(k, k));
        const double delta = next - cw(k);
        if (delta != 0.0) {
          cw(k) = next;
          gw += delta * G.col(k);
        }
      }
      out.updates += w;
      if (sweep % 64 == 63) {
        face_step(G, b, lambda, cw);
        gw = G * cw - b;
        gw.array() += lambda;
      }
      for (Eigen::Index k = 0; k < w; ++k) worst = std::max(worst, kkt_violation(cw(k), gw(k)));
      if (worst <= inner_tol) break;
      if (out.updates > options.max_updates) {
        throw OracleError("grid solver exceeded its coordinate update budget (KKT residual " +
                          std::to_string(worst) + ")");
      }
    }
    for (Eigen::Index k = 0; k < w; ++k) c(work[k]) = cw(k);
    r = A * c - y.values();
  }
  out.coefficients = c;
  out.objective = 0.5 * h * r.squaredNorm() + lambda * c.sum();
  std::vector<Atom> atoms;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (c(j) > 0.0) atoms.push_back({c(j), dict.atoms[static_cast<std::size_t>(j)]});
  }
  out.element = SparseElement(dict.setting, atoms);
  return out;
}

double snapped_grid_objective(const ForwardModel& model, const GridDictionary& dict,
                              const SparseElement& u, const Observation& y, double lambda) {
  std::vector<int> idx;
  for (const Atom& a : u.atoms()) idx.push_back(nearest_grid_atom(dict, a.point));
  std::sort(idx.begin(), idx.end());
  idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  std::vector<ExtremePoint> atoms;
  for (int k : idx) atoms.push_back(dict.atoms[static_cast<std::size_t>(k)]);
  const FitResult fit = fully_corrective_fit(model, atoms, y, lambda);
  std::vector<Atom> list;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    list.push_back({fit.coefficients(static_cast<Eigen::Index>(k)), atoms[k]});
  }
  return primal_objective(model, SparseElement(model.setting(), list), y, lambda);
}

}  // namespace sparsecert
