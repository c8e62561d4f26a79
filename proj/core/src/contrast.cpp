#include "ccreid/contrast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace ccreid {

std::string_view to_string(SamplingMode mode) {
  switch (mode) {
    case SamplingMode::None: return "none";
    case SamplingMode::Average: return "average";
    case SamplingMode::Hardest: return "hardest";
    case SamplingMode::Both: return "both";
  }
  return "unknown";
}

SamplingMode sampling_mode_from_string(std::string_view name) {
  for (SamplingMode m : {SamplingMode::None, SamplingMode::Average, SamplingMode::Hardest, SamplingMode::Both}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown sampling mode '" + std::string(name) + "'");
}

PkSelection pk_sample(const PseudoLabeling& labeling, int clusters_per_batch, int instances_per_cluster, Rng& rng) {
  if (clusters_per_batch < 1 || instances_per_cluster < 1) {
    throw Error(ErrorCode::InvalidConfig, "P and K must be >= 1");
  }
  if (labeling.num_clusters < clusters_per_batch) {
    throw Error(ErrorCode::TooFewClusters, std::to_string(labeling.num_clusters) + " clusters, batch needs " +
                                               std::to_string(clusters_per_batch));
  }
  const auto members = labeling.clusters();

  // Partial Fisher-Yates over cluster ids.
  std::vector<int> ids(static_cast<std::size_t>(labeling.num_clusters));
  std::iota(ids.begin(), ids.end(), 0);
  PkSelection sel;
  for (int p = 0; p < clusters_per_batch; ++p) {
    std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(p), ids.size() - 1);
    std::swap(ids[static_cast<std::size_t>(p)], ids[pick(rng)]);
    sel.clusters.push_back(ids[static_cast<std::size_t>(p)]);
  }

  const auto k = static_cast<std::size_t>(instances_per_cluster);
  for (int c : sel.clusters) {
    std::vector<std::size_t> pool = members[static_cast<std::size_t>(c)];
    if (pool.size() >= k) {
      for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        sel.samples.push_back(pool[i]);
      }
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
      for (std::size_t i = 0; i < k; ++i) sel.samples.push_back(pool[pick(rng)]);
    }
  }
  return sel;
}

BatchLayout TrainBatch::layout() const {
  if (groups.empty()) throw Error(ErrorCode::MalformedGroup, "batch has no groups");
  BatchLayout out;
  out.group_size = groups.front().samples.size();
  for (std::size_t g = 0; g < groups.size(); ++g) {
    if (groups[g].samples.empty() || groups[g].samples.size() != out.group_size) {
      throw Error(ErrorCode::MalformedGroup, "group " + std::to_string(g) + " has " +
                                                 std::to_string(groups[g].samples.size()) + " samples, expected " +
                                                 std::to_string(out.group_size));
    }
    out.group_labels.push_back(groups[g].pseudo_label);
  }
  return out;
}

Matrix TrainBatch::inputs() const {
  std::vector<Vector> rows;
  for (const SyncGroup& g : groups)
    for (const Sample& s : g.samples) rows.push_back(s.raw);
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  return m;
}

ContrastCandidates make_candidates(const DualMemory& mem, SamplingMode mode) {
  ContrastCandidates c;
  const int n = mem.num_clusters();
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), 0);
  switch (mode) {
    case SamplingMode::Both:
      c.entries.resize(2 * n, mem.average.cols());
      c.entries.topRows(n) = mem.average;
      c.entries.bottomRows(n) = mem.hardest;
      c.owners = ids;
      c.owners.insert(c.owners.end(), ids.begin(), ids.end());
      break;
    case SamplingMode::Average:
      c.entries = mem.average;
      c.owners = ids;
      break;
    case SamplingMode::Hardest:
      c.entries = mem.hardest;
      c.owners = ids;
      break;
    case SamplingMode::None:
      throw Error(ErrorCode::InvalidConfig, "sampling mode 'none' uses an instance memory");
  }
  return c;
}

ContrastCandidates make_candidates(const InstanceMemory& mem) { return ContrastCandidates{mem.features, mem.labels}; }

Var info_nce(Var features, const BatchLayout& layout, const ContrastCandidates& candidates, double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw Error(ErrorCode::InvalidTemperature, "temperature must be positive, got " + std::to_string(tau));
  }
  if (static_cast<std::size_t>(features.rows()) != layout.num_rows()) {
    throw Error(ErrorCode::DimensionMismatch, "feature rows do not match the batch layout");
  }
  if (candidates.entries.rows() == 0 || candidates.entries.cols() != features.cols() ||
      static_cast<std::size_t>(candidates.entries.rows()) != candidates.owners.size()) {
    throw Error(ErrorCode::DimensionMismatch, "candidate set does not match feature dimension");
  }
  Tape& tape = *features.tape();
  const Var memory = tape.constant(candidates.entries);
  const Var log_probs = ad::log_softmax_rows(ad::scale(ad::matmul_bt(features, memory), 1.0 / tau));

  std::vector<std::pair<Eigen::Index, Eigen::Index>> positives;
  for (std::size_t r = 0; r < layout.num_rows(); ++r) {
    const int label = layout.row_label(r);
    const std::size_t before = positives.size();
    for (std::size_t c = 0; c < candidates.owners.size(); ++c) {
      if (candidates.owners[c] == label) {
        positives.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
      }
    }
    if (positives.size() == before) {
      throw Error(ErrorCode::UnknownCluster, "row " + std::to_string(r) + " has label " + std::to_string(label) +
                                                 " with no memory entry");
    }
  }
  return ad::scale(ad::mean(ad::pick(log_probs, positives)), -1.0);
}

Var self_identity_loss(Var features, const BatchLayout& layout, SelfIdentityNormalization norm) {
  if (layout.group_size == 0 || layout.num_groups() == 0) throw Error(ErrorCode::MalformedGroup, "empty batch");
  if (static_cast<std::size_t>(features.rows()) != layout.num_rows()) {
    throw Error(ErrorCode::MalformedGroup, "feature rows do not split into groups of " +
                                               std::to_string(layout.group_size));
  }
  Tape& tape = *features.tape();
  if (layout.group_size == 1) return tape.constant(Matrix::Zero(1, 1));

  std::vector<Eigen::Index> first, second;
  for (std::size_t g = 0; g < layout.num_groups(); ++g) {
    const std::size_t base = g * layout.group_size;
    for (std::size_t a = 0; a < layout.group_size; ++a) {
      for (std::size_t b = 0; b < layout.group_size; ++b) {
        if (a == b) continue;
        first.push_back(static_cast<Eigen::Index>(base + a));
        second.push_back(static_cast<Eigen::Index>(base + b));
      }
    }
  }
  const Var probs = ad::softmax_rows(features);
  const Var log_probs = ad::log_softmax_rows(features);
  const Var p_a = ad::gather_rows(probs, first);
  const Var diff = ad::sub(ad::gather_rows(log_probs, first), ad::gather_rows(log_probs, second));
  const Var total = ad::sum(ad::hadamard(p_a, diff));
  const double denom = norm == SelfIdentityNormalization::MeanOverPairs
                           ? static_cast<double>(first.size())
                           : static_cast<double>(layout.num_rows());
  return ad::scale(total, 1.0 / denom);
}

LossBreakdown total_loss(double l_q, double l_s, double alpha) {
  if (!std::isfinite(l_q) || !std::isfinite(l_s) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::NonFinite, "loss terms must be finite");
  }
  if (alpha < 0.0) throw Error(ErrorCode::InvalidConfig, "alpha must be non-negative");
  return LossBreakdown{l_q, l_s, alpha, l_q + alpha * l_s};
}

Var total_loss(Var l_q, Var l_s, double alpha) { return ad::add(l_q, ad::scale(l_s, alpha)); }

}  // namespace ccreid
