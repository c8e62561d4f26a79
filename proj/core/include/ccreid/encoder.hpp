#pragma once

#include <cstdint>
#include <vector>

#include "ccreid/numerics.hpp"
#include "ccreid/tape.hpp"

namespace ccreid {

/// Weights of the MLP feature extractor.
///
/// `tensors` holds W0, b0, W1, b1, ... where Wl is (in × out) and bl is a
/// 1 × out row. Hidden layers use tanh; the last layer is linear and its output
/// is L2-normalized to form the feature.
struct EncoderParams {
  std::vector<Matrix> tensors;

  /// Weights Uniform(−1/√fan_in, 1/√fan_in), seeded; biases start at zero so
  /// the untrained encoder roughly preserves angles between inputs.
  /// `widths` = {input_dim, hidden..., feature_dim}, at least two entries.
  static EncoderParams init(const std::vector<int>& widths, std::uint64_t seed);

  std::size_t num_layers() const noexcept { return tensors.size() / 2; }
  const Matrix& weight(std::size_t layer) const { return tensors.at(2 * layer); }
  const Matrix& bias(std::size_t layer) const { return tensors.at(2 * layer + 1); }
  std::vector<int> widths() const;
  int input_dim() const { return static_cast<int>(weight(0).rows()); }
  int feature_dim() const { return static_cast<int>(weight(num_layers() - 1).cols()); }
  std::size_t num_scalars() const;

  /// Throws InvalidParams when shapes do not chain, entries are non-finite, or
  /// a weight matrix is identically zero (which yields zero features).
  void validate() const;

  bool operator==(const EncoderParams& other) const;
};

/// Feature of a single input. Throws DimensionMismatch or ZeroVector.
Vector encode(const EncoderParams& params, const Vector& x);

/// Features of the rows of `inputs` (n × D → n × F), unit-norm rows.
Matrix encode_batch(const EncoderParams& params, const Matrix& inputs);

/// Encoder parameters bound as leaves of a tape, in `EncoderParams::tensors` order.
struct TapedEncoder {
  std::vector<Var> tensors;
};

TapedEncoder bind(Tape& tape, const EncoderParams& params);

/// Records the forward pass of `inputs` on the tape; returns the n × F node of
/// normalized features.
Var encode(const TapedEncoder& encoder, const Matrix& inputs);

/// Stacks vectors as rows of a matrix.
Matrix stack_rows(const std::vector<Vector>& rows);

}  // namespace ccreid
