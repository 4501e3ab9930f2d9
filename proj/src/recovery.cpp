#include "sparsecert/recovery.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>
#include <thread>

#include <Eigen/Eigenvalues>

namespace sparsecert {

Observation make_noise(const SampleGrid& grid, int channels, double norm_target, std::uint64_t seed) {
  if (!(norm_target >= 0.0)) throw DomainError("noise norm must be nonnegative");
  Signal w(channels, grid.size(), grid.weight());
  if (norm_target == 0.0) return w;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Eigen::Index i = 0; i < w.values().size(); ++i) w.values()(i) = normal(rng);
  w *= norm_target / norm(w);
  return w;
}

std::uint64_t mix_seed(std::uint64_t global_seed, std::uint64_t cell_seed) {
  // splitmix64 finalizer over the pair.
  std::uint64_t z = global_seed * 0x9E3779B97F4A7C15ULL + cell_seed + 0x632BE59BD9B4E019ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

// Square assignment, rows to columns, minimizing total cost.
std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) row_to_col[p[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

MatchReport match_atoms(const SparseElement& recovered, const SparseElement& truth, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  MatchReport out;
  const int nr = static_cast<int>(recovered.size());
  const int nt = static_cast<int>(truth.size());
  out.recovered_count = nr;
  out.truth_count = nt;
  // Distances are O(1); anything at this level means "cannot be paired".
  constexpr double kForbidden = 1e6;
  const int n = std::max(nr, nt);
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < nr; ++i) {
    for (int j = 0; j < nt; ++j) {
      const ExtremePoint& a = recovered.atoms()[i].point;
      const ExtremePoint& b = truth.atoms()[j].point;
      const double d = kind_of(a) == kind_of(b) ? atom_distance(a, b) : kForbidden;
      cost(i, j) = std::isfinite(d) ? std::min(d, kForbidden) : kForbidden;
    }
  }
  const std::vector<int> assign = n > 0 ? hungarian(cost) : std::vector<int>{};
  for (int i = 0; i < nr; ++i) {
    const int j = assign[i];
    if (j < nt && cost(i, j) < kForbidden) out.pairs.emplace_back(i, j);
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  out.max_param_err = out.pairs.empty() ? std::numeric_limits<double>::infinity() : 0.0;
  out.max_coef_err = out.max_param_err;
  bool within = true;
  for (const auto& [i, j] : out.pairs) {
    const double pe = cost(i, j);
    const double ce = std::abs(recovered.atoms()[i].coef - truth.atoms()[j].coef);
    out.param_errors.push_back(pe);
    out.coef_errors.push_back(ce);
    out.max_param_err = std::max(out.max_param_err, pe);
    out.max_coef_err = std::max(out.max_coef_err, ce);
    within = within && pe <= epsilon;
  }
  if (nt == 0 && nr == 0) {
    out.max_param_err = 0.0;
    out.max_coef_err = 0.0;
  }
  out.matched = nr == nt && static_cast<int>(out.pairs.size()) == nt && within;
  return out;
}

double adjoint_norm_estimate(const ForwardModel& model, int resolution) {
  const Setting& s = model.setting();
  const int n = std::max(resolution, 2);
  double best = 0.0;
  auto visit = [&](const ExtremePoint& e) { best = std::max(best, norm(model.column(e))); };
  switch (s.kind) {
    case SettingKind::RadonTV:
      for (int i = 0; i < n; ++i) visit(SignedDirac{static_cast<double>(i) / n, Sign::Positive});
      break;
    case SettingKind::BVIndicator: {
      const double lo = s.margin, hi = 1.0 - s.margin;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          const double a = lo + (hi - lo) * i / (n - 1);
          const double b = j == n - 1 ? hi : lo + (hi - lo) * j / (n - 1);
          visit(SignedIndicator{a, b, Sign::Positive});
        }
      }
      break;
    }
    case SettingKind::PairedWasserstein:
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          visit(PairedDirac{static_cast<double>(i) / n, static_cast<double>(j) / n});
        }
      }
      break;
  }
  return best;
}

double default_alpha(double value_margin, double adjoint_norm) {
  if (!(adjoint_norm > 0.0)) throw DomainError("adjoint norm must be positive");
  return 0.5 * std::max(value_margin, 0.0) / adjoint_norm;
}

double gram_min_eigenvalue(const ForwardModel& model, const SparseElement& truth) {
  const int n = static_cast<int>(truth.size());
  if (n == 0) return 0.0;
  Eigen::MatrixXd G(n, n);
  std::vector<Signal> cols;
  for (const Atom& a : truth.atoms()) cols.push_back(model.column(a.point));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) G(i, j) = inner(cols[i], cols[j]);
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(G, Eigen::EigenvaluesOnly).eigenvalues()(0);
}

void SweepConfig::validate() const {
  if (!(alpha >= 0.0)) throw DomainError("alpha must be nonnegative");
  if (!(lambda0 > 0.0)) throw DomainError("lambda0 must be positive");
  if (lambda_grid.empty()) throw DomainError("lambda_grid must not be empty");
  for (std::size_t k = 0; k < lambda_grid.size(); ++k) {
    if (!(lambda_grid[k] > 0.0)) throw DomainError("lambda_grid entries must be positive");
    if (k > 0 && !(lambda_grid[k] < lambda_grid[k - 1])) {
      throw DomainError("lambda_grid must be strictly decreasing");
    }
  }
  if (noise_fractions.empty()) throw DomainError("noise_fractions must not be empty");
  for (double f : noise_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw DomainError("noise fractions must lie in [0, 1]");
  }
  if (seeds.empty()) throw DomainError("seeds must not be empty");
  if (!(epsilon_match > 0.0)) throw DomainError("epsilon_match must be positive");
  if (threads < 1) throw DomainError("threads must be >= 1");
  solver.validate();
}

bool SweepRecord::recovered(const GuaranteedRegion& region) const {
  return error.empty() && converged && matched && max_coef_err <= region.coef_tol &&
         max_saturation_err <= region.saturation_tol;
}

SweepSummary run_sweep(const ForwardModel& model, const SparseElement& truth,
                       const SweepConfig& config) {
  if (truth.empty()) throw DomainError("ground truth must have at least one atom");
  if (!(truth.setting() == model.setting())) throw DomainError("setting mismatch");
  config.validate();

  SweepSummary summary;
  summary.alpha = config.alpha;
  summary.lambda0 = config.lambda0;
  summary.gram_min_eigenvalue = gram_min_eigenvalue(model, truth);
  if (summary.gram_min_eigenvalue < 1e-8) {
    summary.warnings.push_back("ground-truth columns are close to linearly dependent (Gram eigenvalue " +
                               std::to_string(summary.gram_min_eigenvalue) + ")");
  }

  const GuaranteedRegion& region = config.guaranteed;
  for (double lambda : config.lambda_grid) {
    for (double f : config.noise_fractions) {
      for (std::uint64_t seed : config.seeds) {
        SweepRecord r;
        r.lambda = lambda;
        r.noise_fraction = f;
        r.seed = seed;
        r.admissible = lambda <= config.lambda0;
        r.guaranteed = r.admissible && lambda >= region.lambda_min && lambda <= region.lambda_max &&
                       f <= region.noise_fraction_max;
        summary.records.push_back(r);
      }
    }
  }

  const Observation y0 = model.apply(truth);
  auto run_cell = [&](SweepRecord& r) {
    const auto start = std::chrono::steady_clock::now();
    try {
      const Observation w = make_noise(model.grid(), model.channels(),
                                       r.noise_fraction * config.alpha * r.lambda,
                                       mix_seed(config.global_seed, r.seed));
      r.noise_norm = norm(w);
      const SolveResult s = solve(model, y0 + w, r.lambda, config.solver);
      const MatchReport m = match_atoms(s.element, truth, config.epsilon_match);
      r.count = static_cast<int>(s.element.size());
      r.matched = m.matched;
      r.max_param_err = m.max_param_err;
      r.max_coef_err = m.max_coef_err;
      r.cert_sup = s.certificate_sup;
      r.gap = s.duality_gap;
      r.converged = s.converged;
      for (const Atom& a : s.element.atoms()) {
        r.max_saturation_err = std::max(r.max_saturation_err,
                                        std::abs(model.pairing(s.dual_variable, a.point) - 1.0));
      }
    } catch (const std::exception& e) {
      r.error = e.what();
    }
    r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  };

  const std::size_t cells = summary.records.size();
  const int workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.threads), cells));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < cells; k = next++) run_cell(summary.records[k]);
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  for (const SweepRecord& r : summary.records) {
    summary.any_errors = summary.any_errors || !r.error.empty();
    if (r.guaranteed) {
      ++summary.guaranteed_cells;
      summary.guaranteed_all_recovered = summary.guaranteed_all_recovered && r.recovered(region);
    }
  }
  return summary;
}

}  // namespace sparsecert
