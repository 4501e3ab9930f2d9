#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "sparsecert/recovery.hpp"
#include "test_support.hpp"

namespace sparsecert {
namespace {

SparseElement two_spikes() {
  return SparseElement(Setting::radon_tv(), {{1.0, SignedDirac{0.3, Sign::Positive}},
                                             {0.7, SignedDirac{0.7, Sign::Negative}}});
}

TEST(Noise, NormIsExact) {
  const SampleGrid grid(256, GridKind::Torus);
  for (double target : {1e-6, 0.3, 12.0}) {
    const Observation w = make_noise(grid, 2, target, 77);
    EXPECT_EQ(w.channels(), 2);
    EXPECT_EQ(w.samples(), 256);
    EXPECT_NEAR(norm(w), target, 1e-14 * target);
  }
}

TEST(Noise, ZeroTargetGivesZero) {
  const Observation w = make_noise(SampleGrid(64, GridKind::UnitInterval), 1, 0.0, 3);
  EXPECT_EQ(w.values().lpNorm<Eigen::Infinity>(), 0.0);
}

TEST(Noise, DeterministicPerSeed) {
  const SampleGrid grid(128, GridKind::Torus);
  const Observation a = make_noise(grid, 1, 1.0, 5);
  const Observation b = make_noise(grid, 1, 1.0, 5);
  const Observation c = make_noise(grid, 1, 1.0, 6);
  EXPECT_EQ(a.values(), b.values());
  EXPECT_GT(norm(a - c), 0.1);
  // Roughly centred: the sample mean of 128 normals is within a few 1/sqrt(n).
  const double mean = a.values().mean() / a.values().norm() * std::sqrt(128.0);
  EXPECT_LT(std::abs(mean), 4.0 / std::sqrt(128.0));
}

TEST(Noise, MixSeedSeparatesCells) {
  EXPECT_EQ(mix_seed(1, 2), mix_seed(1, 2));
  EXPECT_NE(mix_seed(1, 2), mix_seed(1, 3));
  EXPECT_NE(mix_seed(1, 2), mix_seed(2, 2));
  EXPECT_NE(mix_seed(0, 1), mix_seed(1, 0));
}

TEST(Matching, IdentityMatchesWithZeroError) {
  const SparseElement u = two_spikes();
  const MatchReport m = match_atoms(u, u, 0.02);
  EXPECT_TRUE(m.matched);
  EXPECT_EQ(m.max_param_err, 0.0);
  EXPECT_EQ(m.max_coef_err, 0.0);
  EXPECT_EQ(m.pairs.size(), 2u);
}

TEST(Matching, ExtraAtomIsNotAMatch) {
  const SparseElement truth = two_spikes();
  const SparseElement rec(Setting::radon_tv(), {{1.0, SignedDirac{0.3, Sign::Positive}},
                                                {0.7, SignedDirac{0.7, Sign::Negative}},
                                                {0.1, SignedDirac{0.5, Sign::Positive}}});
  const MatchReport m = match_atoms(rec, truth, 0.02);
  EXPECT_FALSE(m.matched);
  EXPECT_EQ(m.recovered_count, 3);
  EXPECT_EQ(m.truth_count, 2);
  EXPECT_EQ(m.max_param_err, 0.0);
}

TEST(Matching, WrapsAroundTheTorus) {
  const SparseElement truth(Setting::radon_tv(), {{1.0, SignedDirac{0.02, Sign::Positive}}});
  const SparseElement rec(Setting::radon_tv(), {{0.9, SignedDirac{0.98, Sign::Positive}}});
  const MatchReport m = match_atoms(rec, truth, 0.05);
  EXPECT_TRUE(m.matched);
  EXPECT_NEAR(m.max_param_err, 0.04, 1e-15);
  EXPECT_NEAR(m.max_coef_err, 0.1, 1e-15);
  EXPECT_FALSE(match_atoms(rec, truth, 0.03).matched);
}

TEST(Matching, SignMismatchIsNotAMatch) {
  const SparseElement truth(Setting::radon_tv(), {{1.0, SignedDirac{0.4, Sign::Positive}}});
  const SparseElement rec(Setting::radon_tv(), {{1.0, SignedDirac{0.4, Sign::Negative}}});
  EXPECT_FALSE(match_atoms(rec, truth, 0.5).matched);
}

TEST(Matching, EmptyRecoveryHasInfiniteError) {
  const MatchReport m = match_atoms(SparseElement(Setting::radon_tv()), two_spikes(), 0.02);
  EXPECT_FALSE(m.matched);
  EXPECT_TRUE(std::isinf(m.max_param_err));
}

TEST(Matching, AssignmentIsOptimal) {
  // Brute force over all permutations of four nearby atoms.
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> jitter(-0.03, 0.03);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Atom> t, r;
    for (int i = 0; i < 4; ++i) {
      const double x = 0.1 + 0.05 * i;
      t.push_back({1.0, SignedDirac{x, Sign::Positive}});
      r.push_back({1.0, SignedDirac{x + jitter(rng), Sign::Positive}});
    }
    const SparseElement truth(Setting::radon_tv(), t), rec(Setting::radon_tv(), r);
    std::vector<int> perm(4);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double cost = 0.0;
      for (int i = 0; i < 4; ++i) cost += atom_distance(rec.atoms()[perm[i]].point, truth.atoms()[i].point);
      best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    const MatchReport m = match_atoms(rec, truth, 1.0);
    ASSERT_EQ(m.param_errors.size(), 4u);
    const double total = std::accumulate(m.param_errors.begin(), m.param_errors.end(), 0.0);
    EXPECT_NEAR(total, best, 1e-14) << "trial " << trial;
  }
}

TEST(Constants, AdjointNormOfTranslationInvariantKernel) {
  const ForwardModel tv = testing::tv_model(256);
  const double col_norm = norm(tv.column(SignedDirac{0.0, Sign::Positive}));
  EXPECT_NEAR(adjoint_norm_estimate(tv), col_norm, 1e-12 * col_norm);
  EXPECT_DOUBLE_EQ(default_alpha(0.02, 4.0), 0.0025);
}

TEST(Constants, GramMinEigenvalue) {
  const ForwardModel tv = testing::tv_model(256);
  const SparseElement u = two_spikes();
  Eigen::Matrix2d G;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) G(i, j) = inner(tv.column(u.atoms()[i].point), tv.column(u.atoms()[j].point));
  }
  EXPECT_NEAR(gram_min_eigenvalue(tv, u), Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(G).eigenvalues()(0), 1e-12);
}

SweepConfig small_sweep() {
  SweepConfig c;
  c.alpha = 0.004;
  c.lambda_grid = {1e-2, 1e-3};
  c.noise_fractions = {0.0, 0.5, 1.0};
  c.seeds = {1, 2};
  c.global_seed = 42;
  return c;
}

TEST(Sweep, RecordsComeInGridOrder) {
  const ForwardModel tv = testing::tv_model(256);
  const SweepConfig c = small_sweep();
  const SweepSummary s = run_sweep(tv, two_spikes(), c);
  ASSERT_EQ(s.records.size(), 12u);
  std::size_t k = 0;
  for (double lambda : c.lambda_grid) {
    for (double f : c.noise_fractions) {
      for (std::uint64_t seed : c.seeds) {
        const SweepRecord& r = s.records[k++];
        EXPECT_EQ(r.lambda, lambda);
        EXPECT_EQ(r.noise_fraction, f);
        EXPECT_EQ(r.seed, seed);
        EXPECT_NEAR(r.noise_norm, f * c.alpha * lambda, 1e-18);
        EXPECT_TRUE(r.error.empty());
        EXPECT_EQ(r.admissible, lambda <= c.lambda0);
      }
    }
  }
  EXPECT_FALSE(s.any_errors);
  EXPECT_EQ(s.alpha, c.alpha);
}

TEST(Sweep, NoiselessSmallLambdaIsRecovered) {
  const ForwardModel tv = testing::tv_model(256);
  SweepConfig c = small_sweep();
  c.lambda_grid = {1e-3};
  c.noise_fractions = {0.0};
  c.seeds = {1};
  const SweepSummary s = run_sweep(tv, two_spikes(), c);
  ASSERT_EQ(s.records.size(), 1u);
  const SweepRecord& r = s.records[0];
  EXPECT_TRUE(r.matched);
  EXPECT_EQ(r.count, 2);
  EXPECT_LE(r.max_param_err, 1e-3);
  EXPECT_TRUE(r.guaranteed);
  EXPECT_TRUE(r.recovered(c.guaranteed));
  EXPECT_TRUE(s.guaranteed_all_recovered);
  EXPECT_EQ(s.guaranteed_cells, 1);
}

TEST(Sweep, HugeLambdaGivesEmptyRecovery) {
  const ForwardModel tv = testing::tv_model(256);
  SweepConfig c = small_sweep();
  c.lambda_grid = {20.0};
  c.noise_fractions = {0.0, 1.0};
  const SweepSummary s = run_sweep(tv, two_spikes(), c);
  for (const SweepRecord& r : s.records) {
    EXPECT_EQ(r.count, 0);
    EXPECT_FALSE(r.matched);
    EXPECT_FALSE(r.admissible);
    EXPECT_FALSE(r.guaranteed);
  }
  EXPECT_EQ(s.guaranteed_cells, 0);
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
  const ForwardModel tv = testing::tv_model(256);
  SweepConfig c = small_sweep();
  const SweepSummary one = run_sweep(tv, two_spikes(), c);
  c.threads = 3;
  const SweepSummary three = run_sweep(tv, two_spikes(), c);
  ASSERT_EQ(one.records.size(), three.records.size());
  for (std::size_t k = 0; k < one.records.size(); ++k) {
    EXPECT_EQ(one.records[k].count, three.records[k].count);
    EXPECT_EQ(one.records[k].max_param_err, three.records[k].max_param_err);
    EXPECT_EQ(one.records[k].max_coef_err, three.records[k].max_coef_err);
    EXPECT_EQ(one.records[k].gap, three.records[k].gap);
  }
}

TEST(Sweep, ErrorsGrowWithNoise) {
  // At fixed lambda the mean parameter error over seeds should not shrink as
  // the noise grows (up to 20% slack for sampling).
  const ForwardModel tv = testing::tv_model(256);
  SweepConfig c = small_sweep();
  c.alpha = 0.05;
  c.lambda_grid = {1e-3};
  c.noise_fractions = {0.0, 0.25, 0.5, 1.0};
  c.seeds = {1, 2, 3, 4};
  const SweepSummary s = run_sweep(tv, two_spikes(), c);
  std::vector<double> mean(c.noise_fractions.size(), 0.0);
  for (const SweepRecord& r : s.records) {
    ASSERT_TRUE(r.matched) << "fraction " << r.noise_fraction << " seed " << r.seed;
    const auto i = std::find(c.noise_fractions.begin(), c.noise_fractions.end(), r.noise_fraction) -
                   c.noise_fractions.begin();
    mean[static_cast<std::size_t>(i)] += r.max_param_err / static_cast<double>(c.seeds.size());
  }
  for (std::size_t i = 1; i < mean.size(); ++i) EXPECT_GE(mean[i], 0.8 * mean[i - 1]) << "fraction index " << i;
  EXPECT_GT(mean.back(), mean.front());
}

TEST(Sweep, ValidatesConfig) {
  const ForwardModel tv = testing::tv_model(64);
  SweepConfig c = small_sweep();
  c.lambda_grid = {};
  EXPECT_THROW(run_sweep(tv, two_spikes(), c), DomainError);
  c = small_sweep();
  c.lambda_grid = {1e-3, 1e-2};
  EXPECT_THROW(run_sweep(tv, two_spikes(), c), DomainError);
  c = small_sweep();
  c.noise_fractions = {1.5};
  EXPECT_THROW(run_sweep(tv, two_spikes(), c), DomainError);
  c = small_sweep();
  c.alpha = -1.0;
  EXPECT_THROW(run_sweep(tv, two_spikes(), c), DomainError);
  c = small_sweep();
  c.threads = 0;
  EXPECT_THROW(run_sweep(tv, two_spikes(), c), DomainError);
}

}  // namespace
}  // namespace sparsecert
