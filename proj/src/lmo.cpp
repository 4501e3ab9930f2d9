#include "sparsecert/lmo.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace sparsecert {
namespace {

constexpr double kMinIntervalLength = 1e-9;

bool candidate_before(const Candidate& a, const Candidate& b) {
  if (a.value != b.value) return a.value > b.value;
  return atom_less(a.atom, b.atom);
}

// Projects raw parameters back onto the parameter space; false if the result
// is not a valid atom.
bool project(const Setting& setting, const ExtremePoint& like, Eigen::VectorXd& theta,
             ExtremePoint& out) {
  if (setting.kind == SettingKind::BVIndicator) {
    const double lo = setting.margin, hi = 1.0 - setting.margin;
    theta(0) = std::clamp(theta(0), lo, hi);
    theta(1) = std::clamp(theta(1), lo, hi);
    if (theta(1) - theta(0) < kMinIntervalLength) return false;
  } else {
    for (Eigen::Index i = 0; i < theta.size(); ++i) theta(i) = wrap_unit(theta(i));
  }
  out = with_parameters(like, theta);
  return true;
}

// Ascent direction from the Hessian with eigenvalues replaced by -|lambda|,
// floored so that the step never exceeds `max_step` along any eigenvector.
Eigen::VectorXd ascent_step(const Eigen::VectorXd& g, const Eigen::MatrixXd& H, double max_step) {
  const double gnorm = g.norm();
  if (gnorm == 0.0) return Eigen::VectorXd::Zero(g.size());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(H);
  const Eigen::VectorXd lam = eig.eigenvalues();
  const double floor = std::max(1e-8 * lam.cwiseAbs().maxCoeff(), gnorm / max_step);
  Eigen::VectorXd step = Eigen::VectorXd::Zero(g.size());
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    const Eigen::VectorXd v = eig.eigenvectors().col(i);
    step += v * (v.dot(g) / std::max(std::abs(lam(i)), floor));
  }
  const double inf = step.lpNorm<Eigen::Infinity>();
  if (inf > max_step) step *= max_step / inf;
  return step;
}

}  // namespace

bool atom_less(const ExtremePoint& a, const ExtremePoint& b) {
  const Eigen::VectorXd ta = parameters(a), tb = parameters(b);
  for (Eigen::Index i = 0; i < std::min(ta.size(), tb.size()); ++i) {
    if (ta(i) != tb(i)) return ta(i) < tb(i);
  }
  if (ta.size() != tb.size()) return ta.size() < tb.size();
  return static_cast<int>(sign_of(a)) < static_cast<int>(sign_of(b));
}

// --- ScanTable ---------------------------------------------------------------

ScanTable::ScanTable(const CertificateFunction& eta, int resolution)
    : setting_(eta.setting()), n_(resolution) {
  if (n_ < 4) throw DomainError("scan resolution must be at least 4");
  first_.resize(n_);
  if (setting_.kind == SettingKind::BVIndicator) {
    cell_ = (1.0 - 2.0 * setting_.margin) / (n_ - 1);
    for (int i = 0; i < n_; ++i) first_[i] = eta.eval_all(0, coord(i), true).primitive;
  } else {
    cell_ = 1.0 / n_;
    for (int i = 0; i < n_; ++i) first_[i] = eta.eval(0, coord(i));
    if (setting_.kind == SettingKind::PairedWasserstein) {
      second_.resize(n_);
      for (int i = 0; i < n_; ++i) second_[i] = eta.eval(1, coord(i));
    }
  }
}

double ScanTable::coord(int i) const {
  if (setting_.kind == SettingKind::BVIndicator) {
    return i == n_ - 1 ? 1.0 - setting_.margin : setting_.margin + i * cell_;
  }
  return static_cast<double>(i) / n_;
}

ExtremePoint ScanTable::atom_at(int i, int j, int sign) const {
  switch (setting_.kind) {
    case SettingKind::RadonTV:
      return SignedDirac{coord(i), sign_from_int(sign)};
    case SettingKind::BVIndicator:
      return SignedIndicator{coord(i), coord(j), sign_from_int(sign)};
    case SettingKind::PairedWasserstein:
      break;
  }
  return PairedDirac{coord(i), coord(j)};
}

double ScanTable::value_at(int i, int j, int sign) const {
  switch (setting_.kind) {
    case SettingKind::RadonTV:
      return sign * first_[i];
    case SettingKind::BVIndicator:
      return 0.5 * sign * (first_[j] - first_[i]);
    case SettingKind::PairedWasserstein:
      break;
  }
  const int gap = std::abs(i - j);
  const double d = static_cast<double>(std::min(gap, n_ - gap)) / n_;
  return (first_[i] + second_[j]) / (2.0 + d);
}

std::vector<Candidate> ScanTable::local_maxima(const Region& allowed) const {
  const bool one_dim = setting_.kind == SettingKind::RadonTV;
  const bool torus = setting_.on_torus();
  const bool signed_atoms = setting_.kind != SettingKind::PairedWasserstein;
  const int rows = n_, cols = one_dim ? 1 : n_;
  const int signs = signed_atoms ? 2 : 1;

  auto valid = [&](int i, int j) {
    return setting_.kind != SettingKind::BVIndicator || i < j;
  };
  auto index = [&](int i, int j, int s) {
    return (static_cast<std::size_t>(s) * rows + i) * cols + j;
  };
  std::vector<char> mask;
  if (allowed) {
    mask.assign(static_cast<std::size_t>(signs) * rows * cols, 0);
    for (int s = 0; s < signs; ++s) {
      const int sign = signed_atoms ? 2 * s - 1 : 1;
      for (int i = 0; i < rows; ++i) {
        for (int j = 0; j < cols; ++j) {
          if (valid(i, j)) mask[index(i, j, s)] = allowed(atom_at(i, j, sign)) ? 1 : 0;
        }
      }
    }
  }
  auto usable = [&](int i, int j, int s) {
    return valid(i, j) && (mask.empty() || mask[index(i, j, s)]);
  };

  std::vector<Candidate> out;
  bool have_best = false;
  Candidate best;
  for (int s = 0; s < signs; ++s) {
    const int sign = signed_atoms ? 2 * s - 1 : 1;
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) {
        if (!usable(i, j, s)) continue;
        const double v = value_at(i, j, sign);
        if (!have_best || v > best.value) {
          best = {atom_at(i, j, sign), v};
          have_best = true;
        }
        bool is_max = true;
        for (int di = -1; di <= 1 && is_max; ++di) {
          for (int dj = one_dim ? 0 : -1; dj <= (one_dim ? 0 : 1) && is_max; ++dj) {
            if (di == 0 && dj == 0) continue;
            int ni = i + di, nj = j + dj;
            if (torus) {
              ni = (ni + rows) % rows;
              nj = (nj + cols) % cols;
            } else if (ni < 0 || nj < 0 || ni >= rows || nj >= cols) {
              continue;
            }
            if (!usable(ni, nj, s)) continue;
            const double nv = value_at(ni, nj, sign);
            const bool earlier = ni < i || (ni == i && nj < j);
            is_max = earlier ? v > nv : v >= nv;
          }
        }
        if (is_max) out.push_back({atom_at(i, j, sign), v});
      }
    }
  }
  if (out.empty() && have_best) out.push_back(best);
  std::sort(out.begin(), out.end(), candidate_before);
  return out;
}

// --- polishing ---------------------------------------------------------------

Candidate polish_diagonal(const CertificateFunction& eta, double x, int newton_steps,
                          double max_step, const Region& allowed) {
  auto evaluate = [&](double t) {
    const auto phi = eta.eval_all(0, t), psi = eta.eval_all(1, t);
    return std::array<double, 3>{0.5 * (phi.value + psi.value), 0.5 * (phi.d1 + psi.d1),
                                 0.5 * (phi.d2 + psi.d2)};
  };
  x = wrap_unit(x);
  auto cur = evaluate(x);
  for (int it = 0; it < newton_steps; ++it) {
    Eigen::VectorXd g(1);
    g(0) = cur[1];
    const Eigen::VectorXd step =
        ascent_step(g, Eigen::MatrixXd::Constant(1, 1, cur[2]), max_step);
    if (step(0) == 0.0) break;
    bool accepted = false;
    double t = 1.0;
    for (int half = 0; half < 50; ++half, t *= 0.5) {
      const double xn = wrap_unit(x + t * step(0));
      if (allowed && !allowed(PairedDirac{xn, xn})) continue;
      const auto next = evaluate(xn);
      if (next[0] > cur[0]) {
        accepted = true;
        x = xn;
        cur = next;
        break;
      }
    }
    if (!accepted || std::abs(t * step(0)) < 1e-15) break;
  }
  return {PairedDirac{x, x}, cur[0]};
}

Candidate polish(const CertificateFunction& eta, const Candidate& start, int newton_steps,
                 double max_step, const Region& allowed) {
  const Setting& setting = eta.setting();
  ExtremePoint atom = start.atom;
  double f = eta.pairing(atom);
  for (int it = 0; it < newton_steps; ++it) {
    const PairingDerivatives d = eta.derivatives(atom);
    Eigen::VectorXd g = d.gradient;
    Eigen::MatrixXd H = d.hessian;
    Eigen::VectorXd theta = parameters(atom);
    if (setting.kind == SettingKind::BVIndicator) {
      // Freeze endpoints pinned to the boundary by an outward gradient.
      const double lo = setting.margin, hi = 1.0 - setting.margin;
      for (int c = 0; c < 2; ++c) {
        const bool pinned = (theta(c) <= lo && g(c) < 0.0) || (theta(c) >= hi && g(c) > 0.0);
        if (pinned) {
          g(c) = 0.0;
          H.row(c).setZero();
          H.col(c).setZero();
        }
      }
    }
    const Eigen::VectorXd step = ascent_step(g, H, max_step);
    if (step.lpNorm<Eigen::Infinity>() == 0.0) break;
    bool accepted = false;
    double t = 1.0;
    for (int half = 0; half < 50; ++half, t *= 0.5) {
      Eigen::VectorXd trial = theta + t * step;
      ExtremePoint next;
      if (!project(setting, atom, trial, next)) continue;
      if (allowed && !allowed(next)) continue;
      const double fn = eta.pairing(next);
      if (fn > f) {
        accepted = true;
        atom = next;
        f = fn;
        break;
      }
    }
    if (!accepted || t * step.lpNorm<Eigen::Infinity>() < 1e-15) break;
  }
  Candidate out{atom, f};
  if (setting.kind == SettingKind::PairedWasserstein) {
    const auto& pd = std::get<PairedDirac>(atom);
    if (torus_distance(pd.x, pd.x_bar) <= 2.0 * max_step) {
      const double mid = pd.x - 0.5 * torus_delta(pd.x, pd.x_bar);
      const Candidate diag = polish_diagonal(eta, mid, newton_steps, max_step, allowed);
      if (diag.value > out.value) out = diag;
    }
  }
  return out;
}

LmoResult lmo(const CertificateFunction& eta, const LmoOptions& options) {
  const ScanTable table(eta, options.resolution);
  std::vector<Candidate> cands = table.local_maxima();
  if (static_cast<int>(cands.size()) > options.candidates) cands.resize(options.candidates);
  Candidate best;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const Candidate p = polish(eta, cands[i], options.newton_steps, 2.0 * table.cell());
    if (i == 0 || candidate_before(p, best)) best = p;
  }
  return {best.atom, std::max(0.0, best.value), best.value};
}

LmoResult lmo(const ForwardModel& model, const DualVariable& p, const LmoOptions& options) {
  return lmo(model.certificate(p), options);
}

}  // namespace sparsecert
