#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dsaae/adversary.hpp"
#include "test_support.hpp"

using namespace dsaae;
using dsaae::testing::numeric_grad;
using dsaae::testing::rel_err;
using dsaae::testing::uniform_matrix;

namespace {

constexpr double kPi = std::numbers::pi;

RandomFeatureMap unit_map() {
  RandomFeatureMap map;
  map.frequencies = Matrix::Constant(1, 1, 1.0);
  return map;
}

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

// f(z) written out from its definition: sum_c w_c phi_c(z) with phi built by hand.
double f_oracle(const AdversaryState& s, const RowVector& z) {
  const Index m = s.map.count();
  const double scale = 1.0 / std::sqrt(static_cast<double>(m));
  double total = 0.0;
  for (Index k = 0; k < m; ++k) {
    const double p = s.map.frequencies.row(k).dot(z);
    total += s.alpha(k) * s.frozen_gap(k) * std::cos(p) * scale;
    total += s.alpha(m + k) * s.frozen_gap(m + k) * std::sin(p) * scale;
  }
  return total;
}

AdversaryState random_state(Index m, Index d, std::uint64_t seed, Rng& rng) {
  AdversaryState s(sample_directions(m, d, 1.0, seed), {});
  s.alpha = uniform_matrix(2 * m, 1, -2, 2, rng);
  s.frozen_gap = uniform_matrix(2 * m, 1, -0.3, 0.3, rng);
  return s;
}

}  // namespace

TEST(EmbeddingGap, ZeroForIdenticalBatches) {
  Rng rng(0);
  const Matrix y = uniform_matrix(6, 2, -1, 1, rng);
  EXPECT_TRUE(embedding_gap(y, y, sample_directions(30, 2, 1.0, 1)).isZero(0));
}

TEST(EmbeddingGap, HandTrigonometry) {
  const Vector gap = embedding_gap(scalar(0.0), scalar(kPi), unit_map());
  ASSERT_EQ(gap.size(), 2);
  EXPECT_NEAR(gap(0), 2.0, 1e-15);
  EXPECT_NEAR(gap(1), 0.0, 1e-15);
}

TEST(EmbeddingGap, SquaredNormEqualsRandomFeatureMmd) {
  Rng rng(1);
  std::uniform_int_distribution<int> size(1, 12);
  for (int trial = 0; trial < 50; ++trial) {
    const auto map = sample_directions(40, 3, 1.0 + 0.1 * trial, 100 + trial);
    const Matrix a = uniform_matrix(size(rng), 3, -1, 1, rng), b = uniform_matrix(size(rng), 3, -0.5, 2, rng);
    EXPECT_NEAR(embedding_gap(a, b, map).squaredNorm(), rff_mmd2_biased(map, a, b), 1e-12) << trial;
  }
}

TEST(EmbeddingGap, NormBoundedByTwo) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto map = sample_directions(25, 2, 0.2, trial);
    EXPECT_LE(embedding_gap(uniform_matrix(5, 2, -9, 9, rng), uniform_matrix(7, 2, -9, 9, rng), map).norm(),
              2.0 + 1e-12);
  }
}

TEST(EmbeddingGap, Errors) {
  const auto map = sample_directions(4, 2, 1.0, 0);
  EXPECT_THROW(embedding_gap(Matrix(0, 2), Matrix::Zero(1, 2), map), validation_error);
  EXPECT_THROW(embedding_gap(Matrix::Zero(1, 3), Matrix::Zero(1, 3), map), shape_error);
}

TEST(AdversaryValue, VanishesWithZeroAlphaOrGap) {
  Rng rng(3);
  auto s = random_state(10, 2, 3, rng);
  const Matrix z = uniform_matrix(4, 2, -1, 1, rng);
  auto zero_alpha = s;
  zero_alpha.alpha.setZero();
  EXPECT_TRUE(adversary_value(zero_alpha, z).isZero(0));
  auto zero_gap = s;
  zero_gap.frozen_gap.setZero();
  EXPECT_TRUE(adversary_value(zero_gap, z).isZero(0));
}

TEST(AdversaryValue, OneFrequencyHandCase) {
  AdversaryState s(unit_map(), {});
  s.alpha << 1, 0;
  s.frozen_gap << 2, 0;
  Matrix z(3, 1);
  z << 0.0, 1.0, -2.5;
  const Vector f = adversary_value(s, z);
  for (Index i = 0; i < 3; ++i) EXPECT_NEAR(f(i), 2.0 * std::cos(z(i, 0)), 1e-15);
}

TEST(AdversaryValue, MatchesHandBuiltSum) {
  Rng rng(4);
  auto s = random_state(12, 3, 4, rng);
  const Matrix z = uniform_matrix(5, 3, -1, 1, rng);
  const Vector f = adversary_value(s, z);
  for (Index i = 0; i < 5; ++i) EXPECT_NEAR(f(i), f_oracle(s, z.row(i)), 1e-14);
  EXPECT_THROW(adversary_value(s, Matrix::Zero(1, 2)), shape_error);
}

TEST(MinimaxObjective, HandCasesAndZeros) {
  AdversaryState s(unit_map(), {});
  s.alpha << 1, 0;
  s.frozen_gap << 2, 0;
  EXPECT_NEAR(minimax_objective(s, scalar(0.0), scalar(kPi)), 4.0, 1e-14);
  EXPECT_EQ(minimax_objective(s, scalar(0.3), scalar(0.3)), 0.0);
  s.alpha.setZero();
  EXPECT_EQ(minimax_objective(s, scalar(0.0), scalar(kPi)), 0.0);
}

TEST(MinimaxObjective, EqualsMeanDifferenceOfF) {
  Rng rng(5);
  auto s = random_state(20, 2, 5, rng);
  const Matrix a = uniform_matrix(6, 2, -1, 1, rng), b = uniform_matrix(9, 2, -1, 1, rng);
  EXPECT_NEAR(minimax_objective(s, a, b), adversary_value(s, a).mean() - adversary_value(s, b).mean(), 1e-14);
}

TEST(AdversaryAscend, OneStepHandCase) {
  AdversaryConfig cfg;
  cfg.ascent_lr = 0.1;
  AdversaryState s(unit_map(), cfg);
  adversary_ascend(s, scalar(0.0), scalar(kPi));
  EXPECT_NEAR(s.alpha(0), 0.4, 1e-15);
  EXPECT_NEAR(s.alpha(1), 0.0, 1e-15);
  EXPECT_NEAR(s.frozen_gap(0), 2.0, 1e-15);
}

TEST(AdversaryAscend, ZeroGapIsPureShrinkage) {
  AdversaryConfig cfg;
  cfg.ascent_lr = 0.5;
  cfg.l2_decay = 0.2;
  AdversaryState s(sample_directions(3, 1, 1.0, 0), cfg);
  s.alpha << 1, -2, 3, 0.5, -1, 4;
  const Vector before = s.alpha;
  adversary_ascend(s, scalar(0.7), scalar(0.7));
  EXPECT_LT((s.alpha - 0.9 * before).norm(), 1e-15);
  EXPECT_LT(s.alpha.norm(), before.norm());
}

TEST(AdversaryAscend, ClipsToCap) {
  AdversaryConfig cfg;
  cfg.ascent_lr = 10.0;
  cfg.alpha_cap = 1.5;
  AdversaryState s(unit_map(), cfg);
  adversary_ascend(s, scalar(0.0), scalar(kPi));
  EXPECT_EQ(s.alpha(0), 1.5);
  s.alpha(0) = -1.5;
  Vector gap(2);
  gap << 0, 0;
  adversary_ascend_with_gap(s, gap);
  EXPECT_GE(s.alpha.minCoeff(), -1.5);
}

TEST(AdversaryAscend, NonFiniteUpdateAborts) {
  AdversaryState s(unit_map(), {});
  Vector gap(2);
  gap << NAN, 0;
  EXPECT_THROW(adversary_ascend_with_gap(s, gap), validation_error);
  EXPECT_TRUE(s.alpha.isZero(0));
  EXPECT_THROW(adversary_ascend_with_gap(s, Vector::Zero(3)), shape_error);
}

TEST(AdversaryAscend, RejectsBadConfig) {
  AdversaryConfig cfg;
  cfg.l2_decay = -1.0;
  EXPECT_THROW(AdversaryState(unit_map(), cfg), validation_error);
}

TEST(AdversaryAscend, NeverDecreasesObjectiveWithoutDecay) {
  Rng rng(6);
  AdversaryConfig cfg;
  cfg.l2_decay = 0.0;
  cfg.ascent_lr = 0.05;
  for (int trial = 0; trial < 10; ++trial) {
    AdversaryState s(sample_directions(30, 2, 1.0, trial), cfg);
    const Matrix prior = standard_normal(16, 2, rng), gen = uniform_matrix(16, 2, 0, 2, rng);
    double prev = minimax_objective(s, prior, gen);
    for (int k = 0; k < 100; ++k) {
      adversary_ascend(s, prior, gen);
      const double d = minimax_objective(s, prior, gen);
      EXPECT_GE(d, prev - 1e-15);
      prev = d;
    }
  }
}

TEST(GeneratorGrad, ZeroAlphaGivesZero) {
  Rng rng(7);
  auto s = random_state(8, 2, 7, rng);
  s.alpha.setZero();
  EXPECT_TRUE(generator_grad_wrt_Z(s, uniform_matrix(4, 2, -1, 1, rng)).isZero(0));
}

TEST(GeneratorGrad, OneFrequencyHandCase) {
  AdversaryState s(unit_map(), {});
  s.alpha << 1, 0;
  s.frozen_gap << 2, 0;
  // -f(z) = -2 cos z, derivative 2 sin z = 2 at pi/2
  EXPECT_NEAR(generator_grad_wrt_Z(s, scalar(kPi / 2))(0, 0), 2.0, 1e-15);
}

TEST(GeneratorGrad, MatchesFiniteDifferences) {
  Rng rng(8);
  std::uniform_int_distribution<int> size(1, 8), dim(1, 4), feats(1, 30);
  for (int trial = 0; trial < 25; ++trial) {
    const Index d = dim(rng);
    auto s = random_state(feats(rng), d, 800 + trial, rng);
    const Matrix y = uniform_matrix(size(rng), d, -1.5, 1.5, rng);
    auto f = [&](const Matrix& yy) { return -adversary_value(s, yy).mean(); };
    EXPECT_LT(rel_err(generator_grad_wrt_Z(s, y), numeric_grad(f, y)), 1e-6) << trial;
  }
}

TEST(GeneratorGrad, SmallDescentStepNeverIncreasesObjective) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    AdversaryConfig cfg;
    cfg.ascent_lr = 0.5;
    AdversaryState s(sample_directions(50, 2, 1.0, 900 + trial), cfg);
    const Matrix prior = standard_normal(20, 2, rng);
    Matrix gen = uniform_matrix(20, 2, -0.5, 1.5, rng);
    for (int k = 0; k < 5; ++k) adversary_ascend(s, prior, gen);
    const double before = minimax_objective(s, prior, gen);
    gen -= 1e-3 * generator_grad_wrt_Z(s, gen);
    EXPECT_LE(minimax_objective(s, prior, gen), before + 1e-15) << trial;
  }
}

TEST(GeneratorGrad, Errors) {
  AdversaryState s(unit_map(), {});
  EXPECT_THROW(generator_grad_wrt_Z(s, Matrix::Zero(2, 2)), shape_error);
  EXPECT_THROW(generator_grad_wrt_Z(s, Matrix(0, 1)), validation_error);
}
