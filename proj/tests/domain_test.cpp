#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sparsecert/domain.hpp"
#include "test_support.hpp"

namespace sparsecert {
namespace {

TEST(GValue, EmptyElementIsZero) {
  EXPECT_EQ(g_value(SparseElement(Setting::radon_tv())), 0.0);
}

TEST(GValue, SinglePairedAtomHasUnitValue) {
  SparseElement u(Setting::paired_wasserstein(), {{1.0, PairedDirac{0.2, 0.45}}});
  EXPECT_DOUBLE_EQ(g_value(u), 1.0);
}

TEST(GValue, CoefficientSum) {
  SparseElement u(Setting::radon_tv(), {{0.5, SignedDirac{0.1, Sign::Positive}},
                                        {1.5, SignedDirac{0.6, Sign::Negative}}});
  EXPECT_DOUBLE_EQ(g_value(u), 2.0);
}

TEST(GValue, AdditiveAndHomogeneous) {
  std::mt19937_64 rng(7);
  for (SettingKind kind :
       {SettingKind::RadonTV, SettingKind::BVIndicator, SettingKind::PairedWasserstein}) {
    const ForwardModel model = testing::model_for(kind, 64);
    for (int trial = 0; trial < 20; ++trial) {
      const SparseElement u = testing::random_element(model, rng, 3);
      const SparseElement v = testing::random_element(model, rng, 2);
      EXPECT_NEAR(g_value(u.concatenated(v)), g_value(u) + g_value(v), 1e-14);
      EXPECT_NEAR(g_value(u.scaled(2.5)), 2.5 * g_value(u), 1e-14);
    }
  }
}

TEST(SparseElement, PrunesTinyCoefficients) {
  SparseElement u(Setting::radon_tv(), {{1e-12, SignedDirac{0.1, Sign::Positive}},
                                        {0.3, SignedDirac{0.2, Sign::Positive}}});
  ASSERT_EQ(u.size(), 1u);
  EXPECT_DOUBLE_EQ(u.atoms()[0].coef, 0.3);
}

TEST(SparseElement, RejectsVariantMismatchAndNegativeCoefficients) {
  EXPECT_THROW(SparseElement(Setting::radon_tv(), {{1.0, PairedDirac{0.1, 0.2}}}), DomainError);
  EXPECT_THROW(SparseElement(Setting::radon_tv(), {{-1.0, SignedDirac{0.1, Sign::Positive}}}),
               DomainError);
}

TEST(SparseElement, IndicatorEndpointsRespectMargin) {
  const Setting bv = Setting::bv_indicator(0.1);
  EXPECT_THROW(SparseElement(bv, {{1.0, SignedIndicator{0.05, 0.5, Sign::Positive}}}),
               DomainError);
  EXPECT_THROW(SparseElement(bv, {{1.0, SignedIndicator{0.5, 0.5, Sign::Positive}}}),
               DomainError);
  EXPECT_NO_THROW(SparseElement(bv, {{1.0, SignedIndicator{0.1, 0.9, Sign::Positive}}}));
}

TEST(Setting, BvMarginRange) {
  EXPECT_THROW(Setting::bv_indicator(0.0), DomainError);
  EXPECT_THROW(Setting::bv_indicator(0.5), DomainError);
  EXPECT_NO_THROW(Setting::bv_indicator(0.25));
}

TEST(AtomDistance, Examples) {
  const SignedDirac d{0.3, Sign::Positive};
  EXPECT_EQ(atom_distance(d, d), 0.0);
  EXPECT_NEAR(atom_distance(SignedDirac{0.1, Sign::Positive}, SignedDirac{0.9, Sign::Positive}),
              0.2, 1e-15);
  EXPECT_NEAR(atom_distance(SignedIndicator{0.2, 0.5, Sign::Negative},
                            SignedIndicator{0.25, 0.45, Sign::Negative}),
              0.10, 1e-15);
  EXPECT_NEAR(atom_distance(PairedDirac{0.05, 0.5}, PairedDirac{0.95, 0.55}), 0.15, 1e-15);
}

TEST(AtomDistance, OppositeSignsAreInfinitelyFar) {
  EXPECT_TRUE(std::isinf(
      atom_distance(SignedDirac{0.3, Sign::Positive}, SignedDirac{0.3, Sign::Negative})));
}

TEST(AtomDistance, VariantMismatchThrows) {
  EXPECT_THROW(atom_distance(SignedDirac{0.3, Sign::Positive}, PairedDirac{0.3, 0.4}),
               DomainError);
}

TEST(AtomDistance, IsAMetricOnSameSignAtoms) {
  std::mt19937_64 rng(11);
  for (SettingKind kind :
       {SettingKind::RadonTV, SettingKind::BVIndicator, SettingKind::PairedWasserstein}) {
    const ForwardModel model = testing::model_for(kind, 16);
    for (int trial = 0; trial < 300; ++trial) {
      ExtremePoint a = testing::random_atom(model.setting(), rng);
      ExtremePoint b = testing::random_atom(model.setting(), rng);
      ExtremePoint c = testing::random_atom(model.setting(), rng);
      // force a common sign
      b = with_parameters(a, parameters(b));
      c = with_parameters(a, parameters(c));
      const double ab = atom_distance(a, b), ba = atom_distance(b, a);
      EXPECT_EQ(ab, ba);
      EXPECT_EQ(atom_distance(a, a), 0.0);
      if (parameters(a) != parameters(b)) EXPECT_GT(ab, 0.0);
      EXPECT_LE(atom_distance(a, c), ab + atom_distance(b, c) + 1e-15);
    }
  }
}

TEST(SampleGrid, PointsAndWeights) {
  const SampleGrid torus(4, GridKind::Torus);
  EXPECT_DOUBLE_EQ(torus.point(1), 0.25);
  const SampleGrid interval(4, GridKind::UnitInterval);
  EXPECT_DOUBLE_EQ(interval.point(0), 0.125);
  EXPECT_DOUBLE_EQ(interval.weight(), 0.25);
  EXPECT_THROW(SampleGrid(0, GridKind::Torus), DomainError);
}

TEST(Torus, DeltaIsPrincipal) {
  EXPECT_NEAR(torus_delta(0.02, 0.98), 0.04, 1e-15);
  EXPECT_NEAR(torus_delta(0.98, 0.02), -0.04, 1e-15);
  EXPECT_NEAR(wrap_unit(-0.25), 0.75, 1e-15);
}

}  // namespace
}  // namespace sparsecert
