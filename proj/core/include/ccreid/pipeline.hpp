#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ccreid/clustering.hpp"
#include "ccreid/contrast.hpp"
#include "ccreid/encoder.hpp"
#include "ccreid/evaluation.hpp"
#include "ccreid/memory_bank.hpp"
#include "ccreid/optimizer.hpp"
#include "ccreid/world.hpp"

namespace ccreid {

struct PipelineConfig {
  int clusters_per_batch = 8;      // P
  int instances_per_cluster = 4;   // K
  int synthetic_per_sample = 4;    // S
  double momentum = 0.3;           // m
  double alpha = 0.3;
  double tau = 0.1;
  double eps = 0.4;
  int min_samples = 4;             // M
  int max_epochs = 120;
  int warmup_epochs = 20;
  double base_lr = 0.00035;
  double weight_decay = 0.0005;
  bool use_augmentation = true;    // C_a
  bool use_self_identity = true;   // C_i
  SamplingMode sampling_mode = SamplingMode::Both;  // C_s
  SelfIdentityNormalization self_identity_norm = SelfIdentityNormalization::MeanOverPairs;
  std::vector<int> hidden_widths = {64};
  int feature_dim = 64;
  std::uint64_t init_seed = 1;
  std::uint64_t sampling_seed = 2;
  /// Write an intermediate checkpoint every this many epochs (0 = only at the end).
  int checkpoint_every = 0;

  /// Throws InvalidConfig.
  void validate() const;
};

/// key=value lines, '#' starts a comment. Every key is optional; unknown keys,
/// duplicate keys and malformed values throw InvalidConfig naming the line.
PipelineConfig parse_pipeline_config(std::istream& in);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string to_config_text(const PipelineConfig& config);

WorldConfig parse_world_config(std::istream& in);
WorldConfig load_world_config(const std::filesystem::path& path);

/// Keys: setting (clothing_change | same_clothing), shot (single | multi),
/// exclude_same_camera, ranks (comma list), seed.
EvalProtocol parse_eval_protocol(std::istream& in);
EvalProtocol load_eval_protocol(const std::filesystem::path& path);

struct EpochReport {
  int epoch = 0;
  int num_clusters = 0;
  std::size_t num_noise = 0;
  std::size_t num_train = 0;
  int iterations = 0;
  double mean_l_q = 0.0;
  double mean_l_s = 0.0;
  double mean_total = 0.0;
  double lr = 0.0;
  double wall_seconds = 0.0;
  /// Non-empty when clustering left fewer than P clusters; the epoch then ran no iterations.
  std::string aborted;

  /// Equality of everything except wall time.
  bool same_outcome(const EpochReport& other) const;
};

void write_epoch_reports_csv(const std::filesystem::path& path, const std::vector<EpochReport>& reports);

/// Owns the training state (encoder, optimizer, memory, sampling stream) and
/// runs the per-epoch procedure: extract features of all training originals,
/// cluster them, re-initialize the memory, then iterate PK-sampled batches
/// through augmentation, encoding, loss, backward, Adam and memory updates.
class Trainer {
 public:
  /// `generator` must outlive the trainer. Only non-synthetic Train-split
  /// samples are used.
  Trainer(PipelineConfig config, const std::vector<Sample>& samples, const ClothingSwapGenerator& generator,
          std::vector<StyleTemplate> templates);

  /// Runs one epoch. Errors from any stage propagate and NonFinite carries the
  /// iteration index. With fewer than P clusters the epoch is aborted: no
  /// iterations run and the report's `aborted` field holds the diagnostic.
  EpochReport run_epoch();

  /// Stage 1 of an epoch (extract, cluster, initialize memory). Exposed so
  /// tests can inspect the fresh memory. Returns a non-empty diagnostic when
  /// there are too few clusters to sample a batch.
  std::string begin_epoch();

  const PipelineConfig& config() const noexcept { return config_; }
  const EncoderParams& params() const noexcept { return params_; }
  const OptimizerState& optimizer() const noexcept { return optimizer_; }
  const PseudoLabeling& labeling() const noexcept { return labeling_; }
  const DualMemory& memory() const noexcept { return memory_; }
  const InstanceMemory& instance_memory() const noexcept { return instances_; }
  const std::vector<Sample>& train_samples() const noexcept { return train_; }
  const Rng& rng() const noexcept { return rng_; }
  int epochs_completed() const noexcept { return epochs_completed_; }
  Checkpoint checkpoint() const;

  /// Indices (into train_samples) of every original that entered a batch in
  /// the last epoch.
  const std::vector<std::size_t>& last_epoch_batch_members() const noexcept { return batch_members_; }

 private:
  struct IterationLoss {
    double l_q = 0.0;
    double l_s = 0.0;
    double total = 0.0;
  };

  IterationLoss run_iteration(int epoch, int iteration, double lr);
  TrainBatch make_batch(const PkSelection& selection);
  void update_memory(const PkSelection& selection, const BatchLayout& layout, const Matrix& features);

  PipelineConfig config_;
  std::vector<Sample> train_;
  const ClothingSwapGenerator* generator_;
  std::vector<StyleTemplate> templates_;
  EncoderParams params_;
  OptimizerState optimizer_;
  Rng rng_;
  PseudoLabeling labeling_;
  DualMemory memory_;
  InstanceMemory instances_;
  std::vector<std::size_t> batch_members_;
  int epochs_completed_ = 0;
};

struct TrainingResult {
  Checkpoint checkpoint;
  std::vector<EpochReport> reports;
};

/// Called after every epoch; used for progress output and periodic checkpoints.
using EpochCallback = std::function<void(const Trainer&, const EpochReport&)>;

/// Runs `config.max_epochs` epochs on the world's training split.
TrainingResult run_training(const PipelineConfig& config, const SyntheticWorld& world,
                            const EpochCallback& on_epoch = {});

/// Encodes the Query/Gallery samples into evaluation records.
std::vector<EvalRecord> make_eval_records(const EncoderParams& params, const std::vector<Sample>& samples);

Metrics evaluate_encoder(const EncoderParams& params, const std::vector<Sample>& samples, const EvalProtocol& protocol);

/// Mean pairwise cosine distance between the features of each original in
/// `samples` and its clothing-swapped copies (one per template), averaged over
/// all groups. Measures how clothing-invariant an encoder is.
double mean_sync_group_distance(const EncoderParams& params, const std::vector<Sample>& samples,
                                const ClothingSwapGenerator& generator, std::span<const StyleTemplate> templates);

}  // namespace ccreid
