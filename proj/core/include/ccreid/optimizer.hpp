#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "ccreid/encoder.hpp"

namespace ccreid {

struct OptimizerState {
  std::vector<Matrix> first_moment;
  std::vector<Matrix> second_moment;
  std::int64_t step = 0;
  double base_lr = 0.00035;
  double weight_decay = 0.0005;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  /// Zero moments shaped like `params`.
  static OptimizerState for_params(const EncoderParams& params, double base_lr, double weight_decay);

  bool operator==(const OptimizerState& other) const;
};

/// One Adam update. Weight decay enters as an additive λθ gradient term on
/// every tensor, biases included. Throws ShapeMismatch or NonFiniteGradient;
/// on error neither `params` nor `state` is modified.
void adam_step(OptimizerState& state, EncoderParams& params, const std::vector<Matrix>& gradients, double lr);

struct LrSchedule {
  double base_lr = 0.00035;
  int warmup_epochs = 20;
};

/// Linear warmup from base/E to base over epochs 1..E, constant afterwards.
double warmup_lr(const LrSchedule& schedule, int epoch);

inline constexpr std::uint32_t kCheckpointFormatVersion = 1;

struct Checkpoint {
  EncoderParams params;
  OptimizerState optimizer;
  std::int64_t epochs_completed = 0;

  bool operator==(const Checkpoint&) const = default;
};

/// "CCRCKPT\0" | u32 version | i64 epochs | u32 tensor count | per tensor
/// (u32 rows, u32 cols, f64 column-major data) for params, first and second
/// moments | i64 step | f64 base_lr, weight_decay, beta1, beta2, epsilon.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace ccreid
