#pragma once

#include <Eigen/Dense>

#include <random>

#include "ccreid/error.hpp"

namespace ccreid {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Rng = std::mt19937_64;

// Norms below this are treated as zero by every normalizing operation.
inline constexpr double kZeroNormThreshold = 1e-12;

/// Scales `v` to unit Euclidean length. Throws ZeroVector when ‖v‖ < 1e-12.
Vector l2_normalize(const Vector& v);

/// 1 − cos(a, b), in [0, 2]. Throws ZeroVector for a zero argument and
/// DimensionMismatch when the sizes differ.
double cosine_distance(const Vector& a, const Vector& b);

bool all_finite(const Matrix& m);

/// A probability vector: entries non-negative and summing to one (within 1e-9).
class Distribution {
 public:
  /// Validates `probs`; throws SupportViolation on negative, non-finite or
  /// non-normalized input.
  static Distribution from_probs(Vector probs);

  const Vector& probs() const noexcept { return probs_; }
  Eigen::Index size() const noexcept { return probs_.size(); }
  double operator[](Eigen::Index i) const { return probs_[i]; }

 private:
  explicit Distribution(Vector probs) : probs_(std::move(probs)) {}
  friend Distribution softmax(const Vector& v);

  Vector probs_;
};

/// Max-shifted softmax.
Distribution softmax(const Vector& v);

/// Σ p_i ln(p_i / q_i) with 0·ln(0/q) = 0.
/// Throws DimensionMismatch, or SupportViolation when q_i = 0 < p_i.
double kl_divergence(const Distribution& p, const Distribution& q);

/// KL between two feature vectors, each mapped through softmax first.
double feature_kl(const Vector& a, const Vector& b);

}  // namespace ccreid
