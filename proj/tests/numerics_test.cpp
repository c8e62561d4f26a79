#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "ccreid/numerics.hpp"
#include "oracles.hpp"

namespace ccreid {
namespace {

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

Vector random_vector(Rng& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = g(rng);
  return v;
}

TEST(L2Normalize, ThreeFourFive) {
  const Vector u = l2_normalize(vec({3, 4}));
  EXPECT_DOUBLE_EQ(u[0], 0.6);
  EXPECT_DOUBLE_EQ(u[1], 0.8);
}

TEST(L2Normalize, ZeroVectorIsRejected) {
  try {
    l2_normalize(Vector::Zero(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
  EXPECT_THROW(l2_normalize(Vector::Constant(3, 1e-14)), Error);
}

TEST(L2Normalize, IdempotentWithinTolerance) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const Vector once = l2_normalize(random_vector(rng, 17, std::pow(10.0, t % 7 - 3)));
    const Vector twice = l2_normalize(once);
    EXPECT_LE((once - twice).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(once.norm(), 1.0, 1e-12);
  }
}

TEST(CosineDistance, Examples) {
  EXPECT_NEAR(cosine_distance(vec({1, 0}), vec({0, 1})), 1.0, 1e-15);
  EXPECT_NEAR(cosine_distance(vec({1, 2}), vec({2, 4})), 0.0, 1e-15);
  EXPECT_NEAR(cosine_distance(vec({1, 2}), vec({-1, -2})), 2.0, 1e-15);
  EXPECT_THROW(cosine_distance(vec({1, 2}), vec({1, 2, 3})), Error);
  EXPECT_THROW(cosine_distance(vec({0, 0}), vec({1, 2})), Error);
}

TEST(CosineDistance, SymmetricBoundedMatchesOracle) {
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    const Vector a = random_vector(rng, 8), b = random_vector(rng, 8);
    const double d = cosine_distance(a, b);
    EXPECT_GE(d, 0.0);
    EXPECT_LE(d, 2.0);
    EXPECT_DOUBLE_EQ(d, cosine_distance(b, a));
    EXPECT_NEAR(d, oracle::cosine_distance(a, b), 1e-12);
  }
}

TEST(Softmax, UniformAndShiftInvariant) {
  const Distribution p = softmax(Vector::Zero(5));
  for (Eigen::Index i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(p[i], 0.2);
  const Vector v = vec({0.3, -1.2, 2.0});
  const Distribution a = softmax(v);
  const Distribution b = softmax((v.array() + 1000.0).matrix());
  for (Eigen::Index i = 0; i < 3; ++i) EXPECT_NEAR(a[i], b[i], 1e-13);
}

TEST(Softmax, LargeInputsStayFinite) {
  const Distribution p = softmax(vec({1000.0, 999.0, -1000.0}));
  EXPECT_TRUE(all_finite(p.probs()));
  EXPECT_NEAR(p.probs().sum(), 1.0, 1e-15);
  EXPECT_NEAR(p[0] / p[1], std::exp(1.0), 1e-12);
}

TEST(Softmax, MatchesOracle) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    const Vector v = random_vector(rng, 12, 3.0);
    const Distribution p = softmax(v);
    const auto q = oracle::softmax(v);
    for (Eigen::Index i = 0; i < v.size(); ++i) EXPECT_NEAR(p[i], q[static_cast<std::size_t>(i)], 1e-15);
  }
}

TEST(Distribution, Validation) {
  EXPECT_NO_THROW(Distribution::from_probs(vec({0.25, 0.75})));
  EXPECT_THROW(Distribution::from_probs(vec({0.5, 0.6})), Error);
  EXPECT_THROW(Distribution::from_probs(vec({-0.1, 1.1})), Error);
  EXPECT_THROW(Distribution::from_probs(vec({NAN, 1.0})), Error);
}

TEST(KlDivergence, Examples) {
  const Distribution p = Distribution::from_probs(vec({0.5, 0.5}));
  EXPECT_EQ(kl_divergence(p, p), 0.0);
  const Distribution q = Distribution::from_probs(vec({0.9, 0.1}));
  const double expected = 0.5 * std::log(0.5 / 0.9) + 0.5 * std::log(0.5 / 0.1);
  EXPECT_NEAR(kl_divergence(p, q), expected, 1e-15);
  const Distribution onehot = Distribution::from_probs(vec({1.0, 0.0}));
  EXPECT_NEAR(kl_divergence(onehot, p), std::log(2.0), 1e-15);
}

TEST(KlDivergence, SupportAndShapeErrors) {
  const Distribution p = Distribution::from_probs(vec({0.5, 0.5}));
  const Distribution onehot = Distribution::from_probs(vec({1.0, 0.0}));
  try {
    kl_divergence(p, onehot);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::SupportViolation);
  }
  EXPECT_THROW(kl_divergence(p, Distribution::from_probs(vec({0.2, 0.3, 0.5}))), Error);
}

TEST(KlDivergence, NonNegativeAsymmetricMatchesOracle) {
  Rng rng(13);
  bool saw_asymmetry = false;
  for (int t = 0; t < 300; ++t) {
    const Vector a = random_vector(rng, 6, 2.0), b = random_vector(rng, 6, 2.0);
    const double ab = feature_kl(a, b);
    const double ba = feature_kl(b, a);
    EXPECT_GE(ab, 0.0);
    EXPECT_NEAR(ab, oracle::feature_kl(a, b), 1e-12);
    EXPECT_EQ(feature_kl(a, a), 0.0);
    if (std::abs(ab - ba) > 1e-6) saw_asymmetry = true;
  }
  EXPECT_TRUE(saw_asymmetry);
}

TEST(AllFinite, DetectsNanAndInf) {
  Matrix m = Matrix::Ones(2, 2);
  EXPECT_TRUE(all_finite(m));
  m(1, 0) = INFINITY;
  EXPECT_FALSE(all_finite(m));
  m(1, 0) = NAN;
  EXPECT_FALSE(all_finite(m));
}

}  // namespace
}  // namespace ccreid
