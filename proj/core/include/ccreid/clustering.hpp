#pragma once

#include <span>
#include <vector>

#include "ccreid/numerics.hpp"

namespace ccreid {

struct PseudoLabeling {
  static constexpr int kNoise = -1;

  std::vector<int> labels;
  int num_clusters = 0;

  std::size_t num_noise() const;
  /// Sample indices of every cluster, index = cluster id.
  std::vector<std::vector<std::size_t>> clusters() const;
};

/// Symmetric matrix of cosine distances between all pairs.
Matrix pairwise_cosine_distances(std::span<const Vector> features);

/// DBSCAN under cosine distance.
///
/// A point is core when at least `min_samples` points (itself included) lie
/// within `eps`. Clusters are connected components of core points; a non-core
/// point within `eps` of some core point joins the cluster of the lowest-index
/// such core point, everything else is noise. Cluster ids are numbered by the
/// lowest sample index they contain, so the output is a pure function of the
/// input order. Throws InvalidEps (eps ≤ 0 or min_samples < 1) or Empty.
PseudoLabeling dbscan(std::span<const Vector> features, double eps, int min_samples);

/// Same as above on a precomputed distance matrix.
PseudoLabeling dbscan_from_distances(const Matrix& distances, double eps, int min_samples);

/// Ascending sample indices of `cluster_id`. Throws UnknownCluster.
std::vector<std::size_t> cluster_members(const PseudoLabeling& labeling, int cluster_id);

}  // namespace ccreid
