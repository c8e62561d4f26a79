#include "ccreid/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <string>

namespace ccreid {

void PipelineConfig::validate() const {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
  if (clusters_per_batch < 1) fail("P must be >= 1");
  if (instances_per_cluster < 1) fail("K must be >= 1");
  if (synthetic_per_sample < 0) fail("S must be >= 0");
  if (use_augmentation && synthetic_per_sample < 1) fail("augmentation needs S >= 1");
  if (use_self_identity && !use_augmentation) fail("the self-identity loss requires augmentation");
  if (!(momentum >= 0.0 && momentum <= 1.0)) fail("momentum must lie in [0, 1]");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be finite and non-negative");
  if (!(tau > 0.0) || !std::isfinite(tau)) fail("tau must be positive");
  if (!(eps > 0.0) || !std::isfinite(eps)) fail("eps must be positive");
  if (min_samples < 1) fail("min_samples must be >= 1");
  if (max_epochs < 1) fail("max_epochs must be >= 1");
  if (warmup_epochs < 1) fail("warmup_epochs must be >= 1");
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) fail("base_lr must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) fail("weight_decay must be non-negative");
  if (feature_dim < 1) fail("feature_dim must be >= 1");
  for (int w : hidden_widths)
    if (w < 1) fail("hidden widths must be >= 1");
  if (checkpoint_every < 0) fail("checkpoint_every must be >= 0");
}

bool EpochReport::same_outcome(const EpochReport& o) const {
  return epoch == o.epoch && num_clusters == o.num_clusters && num_noise == o.num_noise && num_train == o.num_train &&
         iterations == o.iterations && mean_l_q == o.mean_l_q && mean_l_s == o.mean_l_s &&
         mean_total == o.mean_total && lr == o.lr && aborted == o.aborted;
}

void write_epoch_reports_csv(const std::filesystem::path& path, const std::vector<EpochReport>& reports) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  out << "epoch,num_clusters,num_noise,num_train,iterations,mean_l_q,mean_l_s,mean_total,lr,wall_seconds,aborted\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const EpochReport& r : reports) {
    out << r.epoch << ',' << r.num_clusters << ',' << r.num_noise << ',' << r.num_train << ',' << r.iterations << ','
        << r.mean_l_q << ',' << r.mean_l_s << ',' << r.mean_total << ',' << r.lr << ',' << r.wall_seconds << ',' << (r.aborted.empty() ? 0 : 1) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

Trainer::Trainer(PipelineConfig config, const std::vector<Sample>& samples, const ClothingSwapGenerator& generator,
                 std::vector<StyleTemplate> templates)
    : config_(std::move(config)), generator_(&generator), templates_(std::move(templates)), rng_(config_.sampling_seed) {
  config_.validate();
  for (const Sample& s : samples)
    if (s.split == Split::Train && !s.is_synthetic) train_.push_back(s);
  if (train_.empty()) throw Error(ErrorCode::InvalidConfig, "no training samples");
  if (config_.use_augmentation && templates_.size() < static_cast<std::size_t>(config_.synthetic_per_sample)) {
    throw Error(ErrorCode::EmptyTemplateBank, "template bank has " + std::to_string(templates_.size()) +
                                                  " entries, S = " + std::to_string(config_.synthetic_per_sample));
  }
  std::vector<int> widths{static_cast<int>(train_.front().raw.size())};
  widths.insert(widths.end(), config_.hidden_widths.begin(), config_.hidden_widths.end());
  widths.push_back(config_.feature_dim);
  params_ = EncoderParams::init(widths, config_.init_seed);
  optimizer_ = OptimizerState::for_params(params_, config_.base_lr, config_.weight_decay);
}

Checkpoint Trainer::checkpoint() const { return Checkpoint{params_, optimizer_, epochs_completed_}; }

std::string Trainer::begin_epoch() {
  std::vector<Vector> raw;
  raw.reserve(train_.size());
  for (const Sample& s : train_) raw.push_back(s.raw);
  const Matrix features = encode_batch(params_, stack_rows(raw));
  std::vector<Vector> rows;
  rows.reserve(train_.size());
  for (Eigen::Index r = 0; r < features.rows(); ++r) rows.push_back(features.row(r).transpose());

  labeling_ = dbscan(rows, config_.eps, config_.min_samples);
  if (labeling_.num_clusters < config_.clusters_per_batch) {
    return "epoch " + std::to_string(epochs_completed_ + 1) + ": " + std::to_string(labeling_.num_clusters) +
           " clusters and " + std::to_string(labeling_.num_noise()) + " noise samples out of " +
           std::to_string(train_.size()) + "; P = " + std::to_string(config_.clusters_per_batch);
  }
  if (config_.sampling_mode == SamplingMode::None) {
    instances_ = init_instance_memory(rows, labeling_.labels, config_.momentum);
    memory_ = DualMemory{};
  } else {
    std::vector<std::vector<Vector>> clustered(static_cast<std::size_t>(labeling_.num_clusters));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (labeling_.labels[i] != PseudoLabeling::kNoise) clustered[static_cast<std::size_t>(labeling_.labels[i])].push_back(rows[i]);
    }
    memory_ = init_memory(clustered, config_.momentum, rng_);
    instances_ = InstanceMemory{};
  }
  return {};
}

TrainBatch Trainer::make_batch(const PkSelection& selection) {
  TrainBatch batch;
  const auto per_cluster = static_cast<std::size_t>(config_.instances_per_cluster);
  std::vector<std::size_t> order(templates_.size());
  for (std::size_t i = 0; i < selection.samples.size(); ++i) {
    SyncGroup group;
    group.source_index = selection.samples[i];
    group.pseudo_label = selection.clusters[i / per_cluster];
    const Sample& original = train_[group.source_index];
    group.samples.push_back(original);
    if (config_.use_augmentation) {
      // A fresh draw of S distinct templates for every original.
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::vector<StyleTemplate> chosen;
      for (int s = 0; s < config_.synthetic_per_sample; ++s) {
        const auto slot = static_cast<std::size_t>(s);
        std::uniform_int_distribution<std::size_t> pick(slot, order.size() - 1);
        std::swap(order[slot], order[pick(rng_)]);
        chosen.push_back(templates_[order[slot]]);
      }
      for (Sample& synthetic : generate_sync(*generator_, original, chosen)) group.samples.push_back(std::move(synthetic));
    }
    batch.groups.push_back(std::move(group));
  }
  return batch;
}

void Trainer::update_memory(const PkSelection& selection, const BatchLayout& layout, const Matrix& features) {
  const auto per_cluster = static_cast<std::size_t>(config_.instances_per_cluster);
  if (config_.sampling_mode == SamplingMode::None) {
    for (std::size_t g = 0; g < layout.num_groups(); ++g) {
      const std::size_t slot = instances_.slot_of(selection.samples[g]);
      instances_.update(slot, features.row(static_cast<Eigen::Index>(g * layout.group_size)).transpose());
    }
    return;
  }
  const int synthetic = static_cast<int>(layout.group_size) - 1;
  for (std::size_t p = 0; p < selection.clusters.size(); ++p) {
    std::vector<Vector> rows;
    const std::size_t first_row = p * per_cluster * layout.group_size;
    for (std::size_t r = 0; r < per_cluster * layout.group_size; ++r) {
      rows.push_back(features.row(static_cast<Eigen::Index>(first_row + r)).transpose());
    }
    const int cluster = selection.clusters[p];
    const SamplingMode mode = config_.sampling_mode;
    if (mode == SamplingMode::Average || mode == SamplingMode::Both) {
      update_average(memory_, cluster, rows, synthetic, config_.instances_per_cluster);
    }
    if (mode == SamplingMode::Hardest || mode == SamplingMode::Both) update_hard(memory_, cluster, rows);
  }
}

Trainer::IterationLoss Trainer::run_iteration(int epoch, int iteration, double lr) {
  const PkSelection selection =
      pk_sample(labeling_, config_.clusters_per_batch, config_.instances_per_cluster, rng_);
  batch_members_.insert(batch_members_.end(), selection.samples.begin(), selection.samples.end());
  const TrainBatch batch = make_batch(selection);
  const BatchLayout layout = batch.layout();

  Tape tape;
  const TapedEncoder encoder = bind(tape, params_);
  const Var features = encode(encoder, batch.inputs());
  const ContrastCandidates candidates = config_.sampling_mode == SamplingMode::None
                                            ? make_candidates(instances_)
                                            : make_candidates(memory_, config_.sampling_mode);
  const Var l_q = info_nce(features, layout, candidates, config_.tau);
  Var root = l_q;
  double l_s = 0.0;
  if (config_.use_self_identity) {
    const Var self = self_identity_loss(features, layout, config_.self_identity_norm);
    l_s = self.value()(0, 0);
    root = total_loss(l_q, self, config_.alpha);
  }
  const IterationLoss loss{l_q.value()(0, 0), l_s, root.value()(0, 0)};
  if (!std::isfinite(loss.total) || !std::isfinite(loss.l_q) || !std::isfinite(loss.l_s)) {
    throw Error(ErrorCode::NonFinite, "non-finite loss at epoch " + std::to_string(epoch) + ", iteration " +
                                          std::to_string(iteration));
  }

  const Gradients grads = tape.backward(root);
  std::vector<Matrix> param_grads;
  param_grads.reserve(encoder.tensors.size());
  for (const Var& t : encoder.tensors) param_grads.push_back(grads[t]);
  adam_step(optimizer_, params_, param_grads, lr);

  // Memory updates use this iteration's forward features, after the loss has
  // been computed against the pre-update memory.
  update_memory(selection, layout, features.value());
  return loss;
}

EpochReport Trainer::run_epoch() {
  const auto start = std::chrono::steady_clock::now();
  const int epoch = epochs_completed_ + 1;
  batch_members_.clear();
  const std::string aborted = begin_epoch();

  EpochReport report;
  report.epoch = epoch;
  report.num_clusters = labeling_.num_clusters;
  report.num_noise = labeling_.num_noise();
  report.num_train = train_.size();
  report.lr = warmup_lr(LrSchedule{config_.base_lr, config_.warmup_epochs}, epoch);
  if (!aborted.empty()) {
    report.aborted = aborted;
    epochs_completed_ = epoch;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
  }

  const std::size_t clustered = train_.size() - report.num_noise;
  const auto batch_originals = static_cast<std::size_t>(config_.clusters_per_batch * config_.instances_per_cluster);
  report.iterations = static_cast<int>((clustered + batch_originals - 1) / batch_originals);

  double sum_q = 0.0, sum_s = 0.0, sum_total = 0.0;
  for (int it = 0; it < report.iterations; ++it) {
    const IterationLoss loss = run_iteration(epoch, it, report.lr);
    sum_q += loss.l_q;
    sum_s += loss.l_s;
    sum_total += loss.total;
  }
  const double n = static_cast<double>(report.iterations);
  report.mean_l_q = sum_q / n;
  report.mean_l_s = sum_s / n;
  report.mean_total = sum_total / n;
  epochs_completed_ = epoch;
  report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

TrainingResult run_training(const PipelineConfig& config, const SyntheticWorld& world, const EpochCallback& on_epoch) {
  Trainer trainer(config, world.samples(), world, world.templates());
  TrainingResult result;
  for (int e = 0; e < config.max_epochs; ++e) {
    result.reports.push_back(trainer.run_epoch());
    if (on_epoch) on_epoch(trainer, result.reports.back());
  }
  result.checkpoint = trainer.checkpoint();
  return result;
}

std::vector<EvalRecord> make_eval_records(const EncoderParams& params, const std::vector<Sample>& samples) {
  std::vector<const Sample*> picked;
  std::vector<Vector> raw;
  for (const Sample& s : samples) {
    if (s.is_synthetic || s.split == Split::Train) continue;
    picked.push_back(&s);
    raw.push_back(s.raw);
  }
  std::vector<EvalRecord> out;
  if (picked.empty()) return out;
  const Matrix features = encode_batch(params, stack_rows(raw));
  for (std::size_t i = 0; i < picked.size(); ++i) {
    const Sample& s = *picked[i];
    out.push_back(EvalRecord{features.row(static_cast<Eigen::Index>(i)).transpose(), s.identity_id, s.clothing_id,
                             s.camera_id, s.split == Split::Query ? Role::Query : Role::Gallery});
  }
  return out;
}

Metrics evaluate_encoder(const EncoderParams& params, const std::vector<Sample>& samples, const EvalProtocol& protocol) {
  const std::vector<EvalRecord> records = make_eval_records(params, samples);
  return evaluate(records, protocol);
}

double mean_sync_group_distance(const EncoderParams& params, const std::vector<Sample>& samples,
                                const ClothingSwapGenerator& generator, std::span<const StyleTemplate> templates) {
  double total = 0.0;
  std::size_t groups = 0;
  for (const Sample& s : samples) {
    if (s.is_synthetic) continue;
    std::vector<Vector> raw{s.raw};
    for (Sample& syn : generate_sync(generator, s, templates)) raw.push_back(std::move(syn.raw));
    const Matrix f = encode_batch(params, stack_rows(raw));
    double group_sum = 0.0;
    std::size_t pairs = 0;
    for (Eigen::Index a = 0; a < f.rows(); ++a) {
      for (Eigen::Index b = a + 1; b < f.rows(); ++b) {
        group_sum += cosine_distance(f.row(a).transpose(), f.row(b).transpose());
        ++pairs;
      }
    }
    total += group_sum / static_cast<double>(pairs);
    ++groups;
  }
  if (groups == 0) throw Error(ErrorCode::Empty, "no original samples");
  return total / static_cast<double>(groups);
}

}  // namespace ccreid
