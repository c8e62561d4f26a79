#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "ccreid/clustering.hpp"
#include "ccreid/memory_bank.hpp"
#include "ccreid/tape.hpp"
#include "ccreid/world.hpp"

namespace ccreid {

/// Which memory entries act as contrast candidates and get updated.
enum class SamplingMode { None, Average, Hardest, Both };

std::string_view to_string(SamplingMode mode);
/// Throws InvalidConfig for an unknown name.
SamplingMode sampling_mode_from_string(std::string_view name);

struct PkSelection {
  /// P distinct cluster ids in draw order.
  std::vector<int> clusters;
  /// P·K training-sample indices, K consecutive entries per cluster.
  std::vector<std::size_t> samples;
};

/// P clusters without replacement, then K members of each (with replacement
/// only when the cluster has fewer than K members). Throws TooFewClusters.
PkSelection pk_sample(const PseudoLabeling& labeling, int clusters_per_batch, int instances_per_cluster, Rng& rng);

/// An original sample followed by its synthetic clothing-changed variants.
struct SyncGroup {
  std::size_t source_index = 0;
  int pseudo_label = 0;
  std::vector<Sample> samples;
};

/// Row structure of a batch feature matrix: groups are contiguous blocks of
/// `group_size` rows, the first row of each block being the original sample.
struct BatchLayout {
  std::size_t group_size = 1;
  std::vector<int> group_labels;

  std::size_t num_groups() const noexcept { return group_labels.size(); }
  std::size_t num_rows() const noexcept { return group_size * group_labels.size(); }
  int row_label(std::size_t row) const { return group_labels[row / group_size]; }
};

struct TrainBatch {
  std::vector<SyncGroup> groups;

  /// Throws MalformedGroup when groups differ in size or are empty.
  BatchLayout layout() const;
  /// All samples stacked group by group.
  Matrix inputs() const;
};

/// Memory entries offered to InfoNCE and the pseudo label owning each row.
struct ContrastCandidates {
  Matrix entries;
  std::vector<int> owners;
};

/// Both: average rows then hardest rows (2N). Average/Hardest: that bank (N).
/// None is not representable by a DualMemory; use the InstanceMemory overload.
ContrastCandidates make_candidates(const DualMemory& mem, SamplingMode mode);
ContrastCandidates make_candidates(const InstanceMemory& mem);

/// Cluster-contrast InfoNCE. Every row of `features` is scored against all
/// candidates with temperature `tau`; each candidate owned by the row's pseudo
/// label is a positive contributing −log softmax_j(f·c/τ). Returns the mean over
/// all (row, positive) pairs as a 1×1 node. Throws InvalidTemperature,
/// UnknownCluster (row label without a positive), or DimensionMismatch.
Var info_nce(Var features, const BatchLayout& layout, const ContrastCandidates& candidates, double tau);

enum class SelfIdentityNormalization {
  /// Mean over ordered pairs a ≠ b.
  MeanOverPairs,
  /// Sum over pairs divided by (number of groups)·(group size).
  PerFeature,
};

/// Σ over each group's ordered pairs a ≠ b of KL(softmax f_a ‖ softmax f_b),
/// normalized as requested. Throws MalformedGroup.
Var self_identity_loss(Var features, const BatchLayout& layout,
                       SelfIdentityNormalization norm = SelfIdentityNormalization::MeanOverPairs);

struct LossBreakdown {
  double l_q = 0.0;
  double l_s = 0.0;
  double alpha = 0.0;
  double total = 0.0;
};

/// total = l_q + α·l_s. Throws NonFinite or InvalidConfig (α < 0).
LossBreakdown total_loss(double l_q, double l_s, double alpha);

/// Tape version of the total loss.
Var total_loss(Var l_q, Var l_s, double alpha);

}  // namespace ccreid
