#include "ccreid/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ccreid {

Vector l2_normalize(const Vector& v) {
  const double norm = v.norm();
  if (!(norm >= kZeroNormThreshold)) {
    throw Error(ErrorCode::ZeroVector, "cannot normalize vector with norm " + std::to_string(norm));
  }
  return v / norm;
}

double cosine_distance(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cosine_distance on sizes " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (!(na >= kZeroNormThreshold) || !(nb >= kZeroNormThreshold)) {
    throw Error(ErrorCode::ZeroVector, "cosine_distance with a zero vector");
  }
  const double cos = a.dot(b) / (na * nb);
  return std::clamp(1.0 - cos, 0.0, 2.0);
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

Distribution Distribution::from_probs(Vector probs) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (!std::isfinite(probs[i]) || probs[i] < 0.0) {
      throw Error(ErrorCode::SupportViolation, "probability entry " + std::to_string(i) + " is invalid");
    }
    sum += probs[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error(ErrorCode::SupportViolation, "probabilities sum to " + std::to_string(sum));
  }
  return Distribution(std::move(probs));
}

Distribution softmax(const Vector& v) {
  if (v.size() == 0) return Distribution(Vector());
  const double shift = v.maxCoeff();
  Vector e = (v.array() - shift).exp().matrix();
  e /= e.sum();
  return Distribution(std::move(e));
}

double kl_divergence(const Distribution& p, const Distribution& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "kl_divergence on sizes " + std::to_string(p.size()) + " and " + std::to_string(q.size()));
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p[i];
    if (pi == 0.0) continue;
    const double qi = q[i];
    if (qi <= 0.0) {
      throw Error(ErrorCode::SupportViolation, "q is zero where p is positive at index " + std::to_string(i));
    }
    total += pi * std::log(pi / qi);
  }
  // Rounding can leave a tiny negative residue when p == q.
  return total < 0.0 ? 0.0 : total;
}

double feature_kl(const Vector& a, const Vector& b) { return kl_divergence(softmax(a), softmax(b)); }

}  // namespace ccreid
