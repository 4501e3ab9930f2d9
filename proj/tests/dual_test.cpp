#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "sparsecert/dual.hpp"
#include "sparsecert/primal.hpp"
#include "test_support.hpp"

namespace sparsecert {
namespace {

constexpr SettingKind kAllKinds[] = {SettingKind::RadonTV, SettingKind::BVIndicator,
                                     SettingKind::PairedWasserstein};

Observation planted(const ForwardModel& model, std::mt19937_64& rng) {
  return model.apply(testing::random_element(model, rng, 2)) + testing::random_signal(model, rng, 0.01);
}

TEST(DualObjective, ClosedForm) {
  const ForwardModel model = testing::tv_model(64);
  std::mt19937_64 rng(1);
  const Observation y = testing::random_signal(model, rng);
  const DualVariable p = testing::random_signal(model, rng);
  const double lambda = 0.3;
  EXPECT_NEAR(dual_objective(y, p, lambda), lambda * inner(y, p) - 0.5 * lambda * lambda * inner(p, p), 1e-14);
  EXPECT_EQ(dual_objective(y, model.zero_signal(), lambda), 0.0);
}

TEST(DualProjection, ZeroDataGivesZero) {
  for (SettingKind kind : kAllKinds) {
    const ForwardModel model = testing::model_for(kind, 128);
    const DualResult r = solve_dual_projection(model, model.zero_signal(), 0.1);
    EXPECT_EQ(norm(r.p), 0.0);
    EXPECT_EQ(r.cuts_used, 0);
    EXPECT_EQ(r.objective, 0.0);
  }
}

TEST(DualProjection, FeasibleDataIsItsOwnProjection) {
  const ForwardModel model = testing::tv_model(256);
  const Signal col = model.column(SignedDirac{0.6, Sign::Positive});
  // y / lambda = 0.5 K e / ||K e||^2 has sup 0.5.
  const double lambda = 2.0 * inner(col, col);
  const DualResult r = solve_dual_projection(model, col, lambda);
  EXPECT_EQ(r.cuts_used, 0);
  EXPECT_LE(norm(r.p - (1.0 / lambda) * col), 1e-15);
  EXPECT_NEAR(r.feasibility_sup, 0.5, 1e-9);
}

TEST(DualProjection, AgreesWithPrimalSolve) {
  std::mt19937_64 rng(6);
  for (SettingKind kind : kAllKinds) {
    const ForwardModel model = testing::model_for(kind, 256);
    const Observation y = planted(model, rng);
    const double lambda = 0.005;
    const SolveResult primal = solve(model, y, lambda);
    const DualResult dual = solve_dual_projection(model, y, lambda);
    EXPECT_LE(norm(primal.dual_variable - dual.p), 1e-6 * (1.0 + norm(dual.p))) << to_string(kind);
    // Strong duality.
    EXPECT_NEAR(primal.objective, dual.objective, 1e-8 * (1.0 + std::abs(primal.objective))) << to_string(kind);
  }
}

TEST(DualProjection, IsAProjectionOntoTheFeasibleSet) {
  std::mt19937_64 rng(9);
  for (SettingKind kind : kAllKinds) {
    const ForwardModel model = testing::model_for(kind, 256);
    const Observation y = planted(model, rng);
    const double lambda = 0.01;
    const DualOptions opts;
    const DualResult r = solve_dual_projection(model, y, lambda, opts);
    EXPECT_LE(feasibility_sup(model, r.p), 1.0 + opts.feas_tol) << to_string(kind);

    // Multiplier representation p = y/lambda - sum mu_k K e_k, mu >= 0, with
    // every cut carrying weight active.
    ASSERT_EQ(r.multipliers.size(), static_cast<Eigen::Index>(r.cuts.size()));
    Observation rebuilt = (1.0 / lambda) * y;
    const CertificateFunction eta = model.certificate(r.p);
    for (std::size_t k = 0; k < r.cuts.size(); ++k) {
      const double mu = r.multipliers(static_cast<Eigen::Index>(k));
      EXPECT_GE(mu, 0.0);
      rebuilt -= mu * model.column(r.cuts[k]);
      if (mu > 1e-9) EXPECT_NEAR(eta.pairing(r.cuts[k]), 1.0, 1e-6) << to_string(kind);
    }
    EXPECT_LE(norm(rebuilt - r.p), 1e-9 * (1.0 + norm(r.p))) << to_string(kind);

    // Variational inequality (q - p, z - p) <= 0 against feasible points z:
    // zero, shrunk copies of p and random directions scaled to be feasible.
    const Observation q = (1.0 / lambda) * y;
    const double slack = 1e-6 * norm(q) * (1.0 + norm(r.p));
    EXPECT_LE(inner(q - r.p, model.zero_signal() - r.p), slack) << to_string(kind);
    EXPECT_LE(inner(q - r.p, 0.5 * r.p - r.p), slack) << to_string(kind);
    for (int t = 0; t < 5; ++t) {
      const Signal d = testing::random_signal(model, rng);
      const Signal z = (1.0 / feasibility_sup(model, d)) * d;
      EXPECT_LE(inner(q - r.p, z - r.p), slack) << to_string(kind);
    }
  }
}

TEST(DualProjection, IsNonExpansive) {
  std::mt19937_64 rng(12);
  for (SettingKind kind : kAllKinds) {
    const ForwardModel model = testing::model_for(kind, 128);
    const double lambda = 0.01;
    const Observation y1 = planted(model, rng);
    const Observation y2 = y1 + testing::random_signal(model, rng, 0.05);
    const DualResult a = solve_dual_projection(model, y1, lambda);
    const DualResult b = solve_dual_projection(model, y2, lambda);
    EXPECT_LE(norm(a.p - b.p), norm(y1 - y2) / lambda * (1.0 + 1e-6)) << to_string(kind);
  }
}

TEST(DualProjection, TvFeasibilityIsSupNorm) {
  std::mt19937_64 rng(14);
  const ForwardModel model = testing::tv_model(256);
  const DualResult r = solve_dual_projection(model, planted(model, rng), 0.002);
  const CertificateFunction eta = model.certificate(r.p);
  double sup = 0.0;
  for (int i = 0; i < 50'000; ++i) sup = std::max(sup, std::abs(eta.eval(0, i / 50'000.0)));
  EXPECT_LE(sup, 1.0 + 1e-8);
  EXPECT_GE(r.feasibility_sup, sup - 1e-12);
}

TEST(DualProjection, RejectsNonPositiveLambda) {
  const ForwardModel model = testing::tv_model(64);
  EXPECT_THROW(solve_dual_projection(model, model.zero_signal(), 0.0), DomainError);
}

TEST(CertificateEstimate, SingleSpikeClosedForm) {
  // For one Dirac and a translation-invariant kernel, K e0 / ||K e0||^2 is
  // feasible and is the least-norm p with (K e0, p) = 1.
  const ForwardModel model = testing::tv_model(256);
  const Signal col = model.column(SignedDirac{0.37, Sign::Positive});
  const CertificateEstimate est =
      estimate_minimal_norm_certificate(model, 1.5 * col, default_lambda_sequence());
  EXPECT_LE(norm(est.p0 - (1.0 / inner(col, col)) * col), 1e-8 * norm(est.p0));
  EXPECT_TRUE(est.converged);
}

TEST(CertificateEstimate, ZeroDataGivesZero) {
  const ForwardModel model = testing::tv_model(128);
  const CertificateEstimate est =
      estimate_minimal_norm_certificate(model, model.zero_signal(), default_lambda_sequence());
  EXPECT_EQ(norm(est.p0), 0.0);
  for (double g : est.cauchy_gaps) EXPECT_EQ(g, 0.0);
}

TEST(CertificateEstimate, NormsIncreaseAndGapsAreConsistent) {
  std::mt19937_64 rng(21);
  for (SettingKind kind : kAllKinds) {
    const ForwardModel model = testing::model_for(kind, 256);
    const Observation y0 = model.apply(testing::random_element(model, rng, 2));
    const std::vector<double> seq = default_lambda_sequence();
    const CertificateEstimate est = estimate_minimal_norm_certificate(model, y0, seq);
    ASSERT_EQ(est.norms.size(), seq.size());
    ASSERT_EQ(est.cauchy_gaps.size(), seq.size() - 1);
    // ||p_lambda|| is nondecreasing as lambda decreases.
    for (std::size_t k = 1; k < est.norms.size(); ++k) {
      EXPECT_GE(est.norms[k], est.norms[k - 1] * (1.0 - 1e-7)) << to_string(kind);
      EXPECT_GE(est.cauchy_gaps[k - 1], std::abs(est.norms[k] - est.norms[k - 1]) - 1e-9) << to_string(kind);
    }
    EXPECT_NEAR(norm(est.p0), est.norms.back(), 1e-12 * (1.0 + est.norms.back()));
    EXPECT_EQ(est.converged, est.cauchy_gaps.back() <= est.cert_tol);
  }
}

TEST(CertificateEstimate, ValidatesSequence) {
  const ForwardModel model = testing::tv_model(64);
  const Observation y = model.zero_signal();
  EXPECT_EQ(default_lambda_sequence().size(), 8u);
  EXPECT_DOUBLE_EQ(default_lambda_sequence().front(), 1e-2);
  EXPECT_DOUBLE_EQ(default_lambda_sequence().back(), 1e-2 / 128.0);
  EXPECT_THROW(estimate_minimal_norm_certificate(model, y, {1e-2, 1e-3}), DomainError);
  EXPECT_THROW(estimate_minimal_norm_certificate(model, y, {1e-2, 1e-3, 1e-3}), DomainError);
  EXPECT_THROW(estimate_minimal_norm_certificate(model, y, {1e-2, 1e-3, -1e-4}), DomainError);
}

}  // namespace
}  // namespace sparsecert
