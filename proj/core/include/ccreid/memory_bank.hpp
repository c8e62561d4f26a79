#pragma once

#include <span>
#include <vector>

#include "ccreid/numerics.hpp"

namespace ccreid {

/// Per-cluster dictionary with two entries per pseudo identity: a running
/// average of its batch features and a running batch-hardest feature. Row i of
/// each bank belongs to cluster i; all rows are unit-norm.
struct DualMemory {
  Matrix average;
  Matrix hardest;
  double momentum = 0.3;

  int num_clusters() const noexcept { return static_cast<int>(average.rows()); }
  Vector average_of(int cluster) const { return average.row(cluster).transpose(); }
  Vector hardest_of(int cluster) const { return hardest.row(cluster).transpose(); }
};

/// Seeds both banks with the same uniformly drawn member of each cluster.
/// Throws EmptyCluster or InvalidConfig (momentum outside [0, 1]).
DualMemory init_memory(const std::vector<std::vector<Vector>>& clustered, double momentum, Rng& rng);

/// Index of the batch feature whose softmax is furthest (in KL) from the
/// softmax of `entry`; ties resolve to the lowest index.
std::size_t select_hardest(const Vector& entry, std::span<const Vector> batch);

/// hardest[i] ← normalize(m·hardest[i] + (1−m)·f_hard). Throws EmptyBatch or UnknownCluster.
void update_hard(DualMemory& mem, int cluster, std::span<const Vector> batch);

/// average[i] ← normalize(m·average[i] + (1−m)·mean(batch)), where the batch
/// must hold exactly (S+1)·K features. Throws WrongBatchSize, UnknownCluster,
/// or ZeroVector when the blended vector vanishes.
void update_average(DualMemory& mem, int cluster, std::span<const Vector> batch, int synthetic_per_sample,
                    int instances_per_cluster);

/// One memory slot per clustered training instance, used when no cluster-level
/// sampling is applied: every instance keeps its own momentum-updated entry.
struct InstanceMemory {
  Matrix features;
  std::vector<int> labels;
  /// Training-sample index owning each slot.
  std::vector<std::size_t> owners;
  double momentum = 0.3;

  std::size_t size() const noexcept { return labels.size(); }
  /// Slot of a training sample. Throws UnknownCluster if it has none.
  std::size_t slot_of(std::size_t owner) const;
  /// features[slot] ← normalize(m·features[slot] + (1−m)·f).
  void update(std::size_t slot, const Vector& feature);
};

/// Slots for every non-noise sample, initialized with its current feature.
InstanceMemory init_instance_memory(std::span<const Vector> features, std::span<const int> labels, double momentum);

}  // namespace ccreid
