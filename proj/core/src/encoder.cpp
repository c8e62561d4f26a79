#include "ccreid/encoder.hpp"

#include <cmath>
#include <random>
#include <string>

namespace ccreid {

EncoderParams EncoderParams::init(const std::vector<int>& widths, std::uint64_t seed) {
  if (widths.size() < 2) throw Error(ErrorCode::InvalidParams, "encoder needs at least input and output widths");
  for (int w : widths) {
    if (w < 1) throw Error(ErrorCode::InvalidParams, "layer widths must be >= 1");
  }
  std::mt19937_64 rng(seed);
  EncoderParams p;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(widths[l]));
    std::uniform_real_distribution<double> uni(-bound, bound);
    Matrix w(widths[l], widths[l + 1]);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = uni(rng);
    Matrix b = Matrix::Zero(1, widths[l + 1]);
    p.tensors.push_back(std::move(w));
    p.tensors.push_back(std::move(b));
  }
  p.validate();
  return p;
}

std::vector<int> EncoderParams::widths() const {
  std::vector<int> out;
  if (tensors.empty()) return out;
  out.push_back(static_cast<int>(weight(0).rows()));
  for (std::size_t l = 0; l < num_layers(); ++l) out.push_back(static_cast<int>(weight(l).cols()));
  return out;
}

std::size_t EncoderParams::num_scalars() const {
  std::size_t n = 0;
  for (const Matrix& t : tensors) n += static_cast<std::size_t>(t.size());
  return n;
}

void EncoderParams::validate() const {
  if (tensors.empty() || tensors.size() % 2 != 0) {
    throw Error(ErrorCode::InvalidParams, "expected alternating weight/bias tensors");
  }
  for (std::size_t l = 0; l < num_layers(); ++l) {
    const Matrix& w = weight(l);
    const Matrix& b = bias(l);
    if (b.rows() != 1 || b.cols() != w.cols()) {
      throw Error(ErrorCode::InvalidParams, "bias of layer " + std::to_string(l) + " has the wrong shape");
    }
    if (l > 0 && weight(l - 1).cols() != w.rows()) {
      throw Error(ErrorCode::InvalidParams, "layer " + std::to_string(l) + " does not chain with its predecessor");
    }
    if (!w.allFinite() || !b.allFinite()) {
      throw Error(ErrorCode::InvalidParams, "layer " + std::to_string(l) + " has non-finite entries");
    }
    if (w.isZero(0.0)) {
      throw Error(ErrorCode::InvalidParams, "layer " + std::to_string(l) + " weights are all zero");
    }
  }
}

bool EncoderParams::operator==(const EncoderParams& other) const {
  if (tensors.size() != other.tensors.size()) return false;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].rows() != other.tensors[i].rows() || tensors[i].cols() != other.tensors[i].cols()) return false;
    if (tensors[i] != other.tensors[i]) return false;
  }
  return true;
}

Matrix encode_batch(const EncoderParams& params, const Matrix& inputs) {
  if (params.tensors.empty()) throw Error(ErrorCode::InvalidParams, "empty encoder");
  if (inputs.cols() != params.input_dim()) {
    throw Error(ErrorCode::DimensionMismatch, "input dimension " + std::to_string(inputs.cols()) +
                                                  ", encoder expects " + std::to_string(params.input_dim()));
  }
  Matrix h = inputs;
  for (std::size_t l = 0; l < params.num_layers(); ++l) {
    Matrix z = h * params.weight(l);
    z.rowwise() += params.bias(l).row(0);
    h = (l + 1 < params.num_layers()) ? Matrix(z.array().tanh().matrix()) : std::move(z);
  }
  for (Eigen::Index r = 0; r < h.rows(); ++r) {
    const double n = h.row(r).norm();
    if (!(n >= kZeroNormThreshold)) {
      throw Error(ErrorCode::ZeroVector, "encoder output for row " + std::to_string(r) + " is zero");
    }
    h.row(r) /= n;
  }
  return h;
}

Vector encode(const EncoderParams& params, const Vector& x) {
  return encode_batch(params, x.transpose()).row(0).transpose();
}

TapedEncoder bind(Tape& tape, const EncoderParams& params) {
  TapedEncoder enc;
  enc.tensors.reserve(params.tensors.size());
  for (const Matrix& t : params.tensors) enc.tensors.push_back(tape.leaf(t));
  return enc;
}

Var encode(const TapedEncoder& encoder, const Matrix& inputs) {
  if (encoder.tensors.empty()) throw Error(ErrorCode::InvalidParams, "empty encoder");
  Tape& tape = *encoder.tensors.front().tape();
  if (inputs.cols() != encoder.tensors.front().rows()) {
    throw Error(ErrorCode::DimensionMismatch, "input dimension " + std::to_string(inputs.cols()) +
                                                  ", encoder expects " +
                                                  std::to_string(encoder.tensors.front().rows()));
  }
  Var h = tape.constant(inputs);
  const std::size_t layers = encoder.tensors.size() / 2;
  for (std::size_t l = 0; l < layers; ++l) {
    h = ad::add_row(ad::matmul(h, encoder.tensors[2 * l]), encoder.tensors[2 * l + 1]);
    if (l + 1 < layers) h = ad::tanh(h);
  }
  return ad::normalize_rows(h);
}

Matrix stack_rows(const std::vector<Vector>& rows) {
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "ragged rows");
    m.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return m;
}

}  // namespace ccreid
