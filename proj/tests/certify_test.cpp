#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "sparsecert/certify.hpp"
#include "test_support.hpp"

namespace sparsecert {
namespace {

// Vanishing-derivative pre-certificate: least-norm p with <eta, e_i> = 1 and
// a vanishing parameter gradient at every atom.
DualVariable precertificate(const ForwardModel& model, const std::vector<ExtremePoint>& atoms) {
  std::vector<Eigen::VectorXd> cols;
  std::vector<double> rhs;
  for (const ExtremePoint& e : atoms) {
    cols.push_back(model.column(e).values());
    rhs.push_back(1.0);
    const Eigen::MatrixXd J = model.column_jacobian(e);
    for (Eigen::Index c = 0; c < J.cols(); ++c) {
      cols.push_back(J.col(c));
      rhs.push_back(0.0);
    }
  }
  Eigen::MatrixXd B(cols.front().size(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) B.col(static_cast<Eigen::Index>(i)) = cols[i];
  const Eigen::MatrixXd G = model.grid().weight() * B.transpose() * B;
  const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(rhs.size()));
  return model.make_signal(B * G.ldlt().solve(r));
}

SparseElement tv_pair(Sign second = Sign::Negative) {
  return SparseElement(Setting::radon_tv(), {{1.0, SignedDirac{0.3, Sign::Positive}},
                                             {0.7, SignedDirac{0.7, second}}});
}

// 1 - sup of sigma * eta(x) over Diracs farther than epsilon from every atom
// of the same sign, on a fine grid.
double tv_value_margin(const CertificateFunction& eta, const SparseElement& u0, double epsilon, int n) {
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    const double v = eta.eval(0, x);
    for (Sign s : {Sign::Positive, Sign::Negative}) {
      bool far = true;
      for (const Atom& a : u0.atoms()) far = far && atom_distance(SignedDirac{x, s}, a.point) > epsilon;
      if (far) best = std::max(best, s == Sign::Positive ? v : -v);
    }
  }
  return 1.0 - best;
}

class TvPrecertificate : public ::testing::TestWithParam<Sign> {};

TEST_P(TvPrecertificate, Passes) {
  const ForwardModel model = testing::tv_model(512);
  const SparseElement u0 = tv_pair(GetParam());
  std::vector<ExtremePoint> atoms;
  for (const Atom& a : u0.atoms()) atoms.push_back(a.point);
  const CertificateFunction eta = model.certificate(precertificate(model, atoms));
  const double epsilon = 0.02;
  const MndscReport r = check_mndsc(u0, eta, epsilon);
  EXPECT_TRUE(r.pass);
  EXPECT_TRUE(r.failing_clauses.empty());
  EXPECT_EQ(r.setting, Setting::radon_tv());
  ASSERT_EQ(r.per_atom.size(), 2u);
  const double h = 1e-4;
  for (const AtomMargins& m : r.per_atom) {
    EXPECT_LE(m.saturation_error, 1e-10);
    const auto& d = std::get<SignedDirac>(m.atom);
    const double sigma = d.sign == Sign::Positive ? 1.0 : -1.0;
    // Central second difference of eta.
    const double fd = (eta.eval(0, d.x + h) - 2.0 * eta.eval(0, d.x) + eta.eval(0, d.x - h)) / (h * h);
    ASSERT_EQ(m.curvature_margins.size(), 1u);
    EXPECT_NEAR(m.curvature_margins[0], -sigma * fd, 1e-4 * std::abs(fd));
    EXPECT_GT(m.curvature_margins[0], 0.0);
  }
  EXPECT_NEAR(r.value_margin, tv_value_margin(eta, u0, epsilon, 100'000), 1e-7);
  ASSERT_TRUE(r.value_margin_argmax.has_value());
  EXPECT_NEAR(1.0 - eta.pairing(*r.value_margin_argmax), r.value_margin, 1e-12);
  const auto notes = r.notes;
  EXPECT_TRUE(std::any_of(notes.begin(), notes.end(),
                          [](const std::string& s) { return s.find("assumed") != std::string::npos; }));
}

INSTANTIATE_TEST_SUITE_P(Mndsc, TvPrecertificate, ::testing::Values(Sign::Positive, Sign::Negative));

TEST(Mndsc, ConstantCertificateFailsExclusivity) {
  // The kernel has unit mass, so p = 1 gives eta close to 1 everywhere.
  const ForwardModel model = testing::tv_model(512);
  DualVariable p = model.zero_signal();
  p.values().setConstant(1.0);
  const CertificateFunction eta = model.certificate(p);
  const MndscReport r = check_mndsc(tv_pair(Sign::Positive), eta, 0.02);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(std::find(r.failing_clauses.begin(), r.failing_clauses.end(), "ii"), r.failing_clauses.end());
  EXPECT_LE(std::abs(r.value_margin), 1e-6);
}

TEST(HessianMargins, DiagonalCases) {
  const HessianMargins a = hessian_margins(Eigen::Vector2d(-1.0, -1.0).asDiagonal());
  EXPECT_TRUE(a.negative_definite);
  EXPECT_EQ(a.margins[0], 1.0);
  EXPECT_EQ(a.margins[1], 1.0);
  EXPECT_EQ(a.trace, -2.0);
  EXPECT_EQ(a.det, 1.0);
  const HessianMargins b = hessian_margins(Eigen::Vector2d(-1.0, 1.0).asDiagonal());
  EXPECT_FALSE(b.negative_definite);
  EXPECT_EQ(b.eigenvalues[0], -1.0);
  EXPECT_EQ(b.eigenvalues[1], 1.0);
  EXPECT_EQ(b.margins[0], -1.0);
  Eigen::Matrix2d c;
  c << -2.0, 1.0, 1.0, -2.0;
  const HessianMargins m = hessian_margins(c);
  EXPECT_TRUE(m.negative_definite);
  EXPECT_NEAR(m.margins[0], 1.0, 1e-15);
  EXPECT_NEAR(m.margins[1], 3.0, 1e-15);
}

TEST(Mndsc, ExtraSaturationFailsExclusivity) {
  // Interpolating a third Dirac at 0.5 puts a second saturation point outside
  // the balls around the truth.
  const ForwardModel model = testing::tv_model(512);
  const SparseElement u0 = tv_pair();
  const DualVariable p = precertificate(
      model, {SignedDirac{0.3, Sign::Positive}, SignedDirac{0.5, Sign::Positive}, SignedDirac{0.7, Sign::Negative}});
  const MndscReport r = check_mndsc(u0, model.certificate(p), 0.02);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(std::find(r.failing_clauses.begin(), r.failing_clauses.end(), "ii"), r.failing_clauses.end());
  EXPECT_LE(std::abs(r.value_margin), 1e-8);
  ASSERT_TRUE(r.value_margin_argmax.has_value());
  EXPECT_LE(atom_distance(*r.value_margin_argmax, SignedDirac{0.5, Sign::Positive}), 1e-4);
}

TEST(Mndsc, ZeroCertificateFailsSaturation) {
  const ForwardModel model = testing::tv_model(128);
  const CertificateFunction eta = model.certificate(model.zero_signal());
  const MndscReport r = check_mndsc(tv_pair(), eta, 0.02);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(std::find(r.failing_clauses.begin(), r.failing_clauses.end(), "ii"), r.failing_clauses.end());
  for (const AtomMargins& m : r.per_atom) EXPECT_NEAR(m.saturation_error, 1.0, 1e-15);
}

TEST(Mndsc, BvMarginsMatchFiniteDifferences) {
  const ForwardModel model = testing::bv_model(512, 0.02);
  const SignedIndicator e{0.35, 0.6, Sign::Positive};
  const SparseElement u0(model.setting(), {{1.2, e}});
  const CertificateFunction eta = model.certificate(precertificate(model, {e}));
  const MndscReport r = check_mndsc(u0, eta, 0.02);
  ASSERT_EQ(r.per_atom.size(), 1u);
  const AtomMargins& m = r.per_atom[0];
  ASSERT_EQ(m.curvature_margins.size(), 2u);
  const double h = 1e-5;
  auto d1 = [&](double t) { return (eta.eval(0, t + h) - eta.eval(0, t - h)) / (2.0 * h); };
  EXPECT_NEAR(m.curvature_margins[0], d1(e.a), 1e-5 * std::abs(d1(e.a)));
  EXPECT_NEAR(m.curvature_margins[1], -d1(e.b), 1e-5 * std::abs(d1(e.b)));
  EXPECT_TRUE(r.pass);
}

TEST(Mndsc, PairedEigenvaluesMatchFiniteDifferences) {
  const ForwardModel model = testing::paired_model(512);
  const PairedDirac e{0.4, 0.55};
  const SparseElement u0(model.setting(), {{1.0, e}});
  const CertificateFunction eta = model.certificate(precertificate(model, {e}));
  const MndscReport r = check_mndsc(u0, eta, 0.02);
  ASSERT_EQ(r.per_atom.size(), 1u);
  const AtomMargins& m = r.per_atom[0];
  EXPECT_FALSE(m.degenerate);

  const double h = 1e-4;
  auto f = [&](double dx, double dy) { return eta.pairing(PairedDirac{e.x + dx, e.x_bar + dy}); };
  Eigen::Matrix2d H;
  H(0, 0) = (f(h, 0) - 2.0 * f(0, 0) + f(-h, 0)) / (h * h);
  H(1, 1) = (f(0, h) - 2.0 * f(0, 0) + f(0, -h)) / (h * h);
  H(0, 1) = H(1, 0) = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
  Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H).eigenvalues();
  ASSERT_EQ(m.hessian_eigenvalues.size(), 2u);
  std::vector<double> got = m.hessian_eigenvalues;
  std::sort(got.begin(), got.end());
  for (int k = 0; k < 2; ++k) EXPECT_NEAR(got[k], ev(k), 1e-3 * ev.cwiseAbs().maxCoeff());
  EXPECT_NEAR(m.hessian_trace, H.trace(), 1e-3 * std::abs(H.trace()));
  EXPECT_NEAR(m.hessian_det, H.determinant(), 2e-3 * std::abs(H.determinant()));
  std::vector<double> margins = m.curvature_margins;
  std::sort(margins.begin(), margins.end());
  ASSERT_EQ(margins.size(), 2u);
  EXPECT_DOUBLE_EQ(margins[0], -got[1]);
  EXPECT_DOUBLE_EQ(margins[1], -got[0]);
}

TEST(Mndsc, PairedKinkIsDegenerate) {
  const ForwardModel model = testing::paired_model(256);
  const PairedDirac e{0.4, 0.4};
  const Signal col = model.column(e);
  const SparseElement u0(model.setting(), {{1.0, e}});
  const MndscReport r = check_mndsc(u0, model.certificate((1.0 / inner(col, col)) * col), 0.02);
  ASSERT_EQ(r.per_atom.size(), 1u);
  EXPECT_TRUE(r.per_atom[0].degenerate);
  EXPECT_FALSE(r.pass);
  EXPECT_NE(std::find(r.failing_clauses.begin(), r.failing_clauses.end(), "iii"), r.failing_clauses.end());
}

TEST(Mndsc, IsDeterministic) {
  const ForwardModel model = testing::tv_model(256);
  const SparseElement u0 = tv_pair();
  const CertificateFunction eta =
      model.certificate(precertificate(model, {SignedDirac{0.3, Sign::Positive}, SignedDirac{0.7, Sign::Negative}}));
  const MndscReport a = check_mndsc(u0, eta, 0.02);
  const MndscReport b = check_mndsc(u0, eta, 0.02);
  EXPECT_EQ(a.value_margin, b.value_margin);
  EXPECT_EQ(a.pass, b.pass);
  for (std::size_t i = 0; i < a.per_atom.size(); ++i) {
    EXPECT_EQ(a.per_atom[i].curvature_margins, b.per_atom[i].curvature_margins);
  }
}

TEST(Mndsc, RejectsBadInput) {
  const ForwardModel model = testing::tv_model(64);
  const CertificateFunction eta = model.certificate(model.zero_signal());
  EXPECT_THROW(check_mndsc(SparseElement(Setting::radon_tv()), eta, 0.02), DomainError);
  EXPECT_THROW(check_mndsc(tv_pair(), eta, 0.0), DomainError);
  const SparseElement bv(Setting::bv_indicator(0.1), {{1.0, SignedIndicator{0.3, 0.5, Sign::Positive}}});
  EXPECT_THROW(check_mndsc(bv, eta, 0.02), DomainError);
}

TEST(CriticalSet, RecoversInterpolatedAtoms) {
  const ForwardModel model = testing::tv_model(512);
  const std::vector<ExtremePoint> atoms = {SignedDirac{0.3, Sign::Positive}, SignedDirac{0.7, Sign::Negative}};
  const CertificateFunction eta = model.certificate(precertificate(model, atoms));
  const std::vector<ExtremePoint> set = extreme_critical_set(eta, 1e-6);
  ASSERT_EQ(set.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) EXPECT_LE(atom_distance(set[i], atoms[i]), 1e-4);
}

TEST(CriticalSet, EmptyForZeroCertificate) {
  const ForwardModel model = testing::tv_model(128);
  EXPECT_TRUE(extreme_critical_set(model.certificate(model.zero_signal()), 1e-6).empty());
}

TEST(CriticalSet, PairedAtomIsFound) {
  const ForwardModel model = testing::paired_model(256);
  const PairedDirac e{0.4, 0.55};
  const CertificateFunction eta = model.certificate(precertificate(model, {e}));
  const std::vector<ExtremePoint> set = extreme_critical_set(eta, 1e-6);
  ASSERT_EQ(set.size(), 1u);
  EXPECT_LE(atom_distance(set[0], e), 1e-4);
}

}  // namespace
}  // namespace sparsecert
