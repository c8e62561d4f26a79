#include "ccreid/clustering.hpp"

#include <algorithm>
#include <numeric>
#include <string>

namespace ccreid {

std::size_t PseudoLabeling::num_noise() const {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), kNoise));
}

std::vector<std::vector<std::size_t>> PseudoLabeling::clusters() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(num_clusters));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != kNoise) out[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  return out;
}

Matrix pairwise_cosine_distances(std::span<const Vector> features) {
  const auto n = static_cast<Eigen::Index>(features.size());
  Matrix d = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = cosine_distance(features[static_cast<std::size_t>(i)], features[static_cast<std::size_t>(j)]);
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

namespace {

struct DisjointSets {
  explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }

  std::size_t find(std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  }
  // Keeps the smaller index as root so roots are component minima.
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (b < a) std::swap(a, b);
    parent[b] = a;
  }

  std::vector<std::size_t> parent;
};

}  // namespace

PseudoLabeling dbscan_from_distances(const Matrix& distances, double eps, int min_samples) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidEps, "eps must be positive, got " + std::to_string(eps));
  if (min_samples < 1) throw Error(ErrorCode::InvalidEps, "min_samples must be >= 1");
  const auto n = static_cast<std::size_t>(distances.rows());
  if (n == 0) throw Error(ErrorCode::Empty, "no features to cluster");
  if (distances.cols() != distances.rows()) throw Error(ErrorCode::DimensionMismatch, "distance matrix not square");

  std::vector<std::vector<std::size_t>> neighbors(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j || distances(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) <= eps) {
        neighbors[i].push_back(j);
      }
    }
  }
  std::vector<bool> core(n);
  for (std::size_t i = 0; i < n; ++i) core[i] = neighbors[i].size() >= static_cast<std::size_t>(min_samples);

  DisjointSets sets(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!core[i]) continue;
    for (std::size_t j : neighbors[i])
      if (core[j]) sets.unite(i, j);
  }

  // Representative core point per sample: itself if core, otherwise the
  // lowest-index core neighbor (neighbor lists are ascending).
  std::vector<std::size_t> anchor(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (core[i]) {
      anchor[i] = i;
      continue;
    }
    for (std::size_t j : neighbors[i]) {
      if (core[j]) {
        anchor[i] = j;
        break;
      }
    }
  }

  PseudoLabeling out;
  out.labels.assign(n, PseudoLabeling::kNoise);
  std::vector<int> id_of_root(n, PseudoLabeling::kNoise);
  for (std::size_t i = 0; i < n; ++i) {
    if (anchor[i] == n) continue;
    const std::size_t root = sets.find(anchor[i]);
    if (id_of_root[root] == PseudoLabeling::kNoise) id_of_root[root] = out.num_clusters++;
    out.labels[i] = id_of_root[root];
  }
  return out;
}

PseudoLabeling dbscan(std::span<const Vector> features, double eps, int min_samples) {
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidEps, "eps must be positive, got " + std::to_string(eps));
  if (features.empty()) throw Error(ErrorCode::Empty, "no features to cluster");
  return dbscan_from_distances(pairwise_cosine_distances(features), eps, min_samples);
}

std::vector<std::size_t> cluster_members(const PseudoLabeling& labeling, int cluster_id) {
  if (cluster_id < 0 || cluster_id >= labeling.num_clusters) {
    throw Error(ErrorCode::UnknownCluster, "cluster " + std::to_string(cluster_id) + " of " +
                                               std::to_string(labeling.num_clusters));
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < labeling.labels.size(); ++i) {
    if (labeling.labels[i] == cluster_id) out.push_back(i);
  }
  return out;
}

}  // namespace ccreid
