#include "ccreid/memory_bank.hpp"

#include <algorithm>
#include <string>

namespace ccreid {
namespace {

void check_momentum(double m) {
  if (!(m >= 0.0 && m <= 1.0)) throw Error(ErrorCode::InvalidConfig, "momentum must lie in [0, 1]");
}

void check_cluster(const DualMemory& mem, int cluster) {
  if (cluster < 0 || cluster >= mem.num_clusters()) {
    throw Error(ErrorCode::UnknownCluster, "cluster " + std::to_string(cluster) + " of " +
                                               std::to_string(mem.num_clusters()));
  }
}

Vector blend(const Vector& old_value, const Vector& candidate, double m) {
  return l2_normalize(m * old_value + (1.0 - m) * candidate);
}

}  // namespace

DualMemory init_memory(const std::vector<std::vector<Vector>>& clustered, double momentum, Rng& rng) {
  check_momentum(momentum);
  if (clustered.empty()) throw Error(ErrorCode::EmptyCluster, "no clusters to initialize from");
  const Eigen::Index dim = clustered.front().empty() ? 0 : clustered.front().front().size();
  DualMemory mem;
  mem.momentum = momentum;
  mem.average.resize(static_cast<Eigen::Index>(clustered.size()), dim);
  for (std::size_t c = 0; c < clustered.size(); ++c) {
    const auto& members = clustered[c];
    if (members.empty()) throw Error(ErrorCode::EmptyCluster, "cluster " + std::to_string(c) + " is empty");
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    const Vector& chosen = members[pick(rng)];
    if (chosen.size() != dim) throw Error(ErrorCode::DimensionMismatch, "features of differing dimension");
    mem.average.row(static_cast<Eigen::Index>(c)) = l2_normalize(chosen).transpose();
  }
  mem.hardest = mem.average;
  return mem;
}

std::size_t select_hardest(const Vector& entry, std::span<const Vector> batch) {
  if (batch.empty()) throw Error(ErrorCode::EmptyBatch, "no candidates for the hardest update");
  const Distribution target = softmax(entry);
  std::size_t best = 0;
  double best_kl = -1.0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const double kl = kl_divergence(softmax(batch[i]), target);
    if (kl > best_kl) {
      best_kl = kl;
      best = i;
    }
  }
  return best;
}

void update_hard(DualMemory& mem, int cluster, std::span<const Vector> batch) {
  check_cluster(mem, cluster);
  const Vector entry = mem.hardest_of(cluster);
  const std::size_t hard = select_hardest(entry, batch);
  mem.hardest.row(cluster) = blend(entry, batch[hard], mem.momentum).transpose();
}

void update_average(DualMemory& mem, int cluster, std::span<const Vector> batch, int synthetic_per_sample,
                    int instances_per_cluster) {
  check_cluster(mem, cluster);
  const auto expected = static_cast<std::size_t>((synthetic_per_sample + 1) * instances_per_cluster);
  if (synthetic_per_sample < 0 || instances_per_cluster < 1 || batch.size() != expected) {
    throw Error(ErrorCode::WrongBatchSize, "expected " + std::to_string(expected) + " features, got " +
                                               std::to_string(batch.size()));
  }
  Vector total = Vector::Zero(mem.average.cols());
  for (const Vector& f : batch) total += f;
  const Vector mean = total / static_cast<double>(expected);
  mem.average.row(cluster) = blend(mem.average_of(cluster), mean, mem.momentum).transpose();
}

std::size_t InstanceMemory::slot_of(std::size_t owner) const {
  const auto it = std::lower_bound(owners.begin(), owners.end(), owner);
  if (it == owners.end() || *it != owner) {
    throw Error(ErrorCode::UnknownCluster, "sample " + std::to_string(owner) + " has no memory slot");
  }
  return static_cast<std::size_t>(it - owners.begin());
}

void InstanceMemory::update(std::size_t slot, const Vector& feature) {
  const auto row = static_cast<Eigen::Index>(slot);
  const Vector old_value = features.row(row).transpose();
  features.row(row) = blend(old_value, feature, momentum).transpose();
}

InstanceMemory init_instance_memory(std::span<const Vector> features, std::span<const int> labels, double momentum) {
  check_momentum(momentum);
  if (features.size() != labels.size()) throw Error(ErrorCode::DimensionMismatch, "features and labels differ in length");
  InstanceMemory mem;
  mem.momentum = momentum;
  std::vector<Vector> rows;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (labels[i] < 0) continue;
    rows.push_back(l2_normalize(features[i]));
    mem.labels.push_back(labels[i]);
    mem.owners.push_back(i);
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyCluster, "no clustered instances");
  mem.features.resize(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) mem.features.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return mem;
}

}  // namespace ccreid
