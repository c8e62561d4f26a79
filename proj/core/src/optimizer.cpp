#include "ccreid/optimizer.hpp"

#include <array>
#include <cmath>
#include <string>

#include "binary_io.hpp"

namespace ccreid {

OptimizerState OptimizerState::for_params(const EncoderParams& params, double base_lr, double weight_decay) {
  OptimizerState s;
  s.base_lr = base_lr;
  s.weight_decay = weight_decay;
  for (const Matrix& t : params.tensors) {
    s.first_moment.push_back(Matrix::Zero(t.rows(), t.cols()));
    s.second_moment.push_back(Matrix::Zero(t.rows(), t.cols()));
  }
  return s;
}

bool OptimizerState::operator==(const OptimizerState& o) const {
  auto same = [](const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols() || a[i] != b[i]) return false;
    }
    return true;
  };
  return same(first_moment, o.first_moment) && same(second_moment, o.second_moment) && step == o.step &&
         base_lr == o.base_lr && weight_decay == o.weight_decay && beta1 == o.beta1 && beta2 == o.beta2 &&
         epsilon == o.epsilon;
}

void adam_step(OptimizerState& state, EncoderParams& params, const std::vector<Matrix>& gradients, double lr) {
  const std::size_t n = params.tensors.size();
  if (gradients.size() != n || state.first_moment.size() != n || state.second_moment.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "gradient/moment count does not match parameter count");
  }
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix& p = params.tensors[i];
    for (const Matrix* other : std::array<const Matrix*, 3>{&gradients[i], &state.first_moment[i], &state.second_moment[i]}) {
      if (other->rows() != p.rows() || other->cols() != p.cols()) {
        throw Error(ErrorCode::ShapeMismatch, "tensor " + std::to_string(i) + " shape mismatch");
      }
    }
    if (!gradients[i].allFinite()) {
      throw Error(ErrorCode::NonFiniteGradient, "gradient of tensor " + std::to_string(i) + " is not finite");
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < n; ++i) {
    Matrix& p = params.tensors[i];
    const Matrix g = gradients[i] + state.weight_decay * p;
    Matrix& m = state.first_moment[i];
    Matrix& v = state.second_moment[i];
    m = state.beta1 * m + (1.0 - state.beta1) * g;
    v = state.beta2 * v + (1.0 - state.beta2) * g.cwiseProduct(g);
    const auto m_hat = m.array() / correction1;
    const auto v_hat = v.array() / correction2;
    p.array() -= lr * m_hat / (v_hat.sqrt() + state.epsilon);
  }
}

double warmup_lr(const LrSchedule& schedule, int epoch) {
  if (epoch < 1) throw Error(ErrorCode::InvalidConfig, "epochs are numbered from 1");
  if (schedule.warmup_epochs < 1) throw Error(ErrorCode::InvalidConfig, "warmup_epochs must be >= 1");
  if (epoch >= schedule.warmup_epochs) return schedule.base_lr;
  return schedule.base_lr * static_cast<double>(epoch) / static_cast<double>(schedule.warmup_epochs);
}

namespace {

constexpr std::array<char, 8> kMagic = {'C', 'C', 'R', 'C', 'K', 'P', 'T', '\0'};

void write_tensor(BinaryWriter& out, const Matrix& m) {
  out.u32(static_cast<std::uint32_t>(m.rows()));
  out.u32(static_cast<std::uint32_t>(m.cols()));
  out.bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
}

Matrix read_tensor(BinaryReader& in) {
  const std::uint32_t rows = in.u32("tensor rows");
  const std::uint32_t cols = in.u32("tensor cols");
  const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols;
  if (count * sizeof(double) > in.remaining()) throw Error(ErrorCode::FormatError, "truncated tensor data");
  Matrix m(rows, cols);
  in.bytes(m.data(), sizeof(double) * static_cast<std::size_t>(count), "tensor data");
  return m;
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const auto& opt = ckpt.optimizer;
  const std::size_t n = ckpt.params.tensors.size();
  if (opt.first_moment.size() != n || opt.second_moment.size() != n) {
    throw Error(ErrorCode::ShapeMismatch, "optimizer state does not match parameters");
  }
  BinaryWriter out(path);
  out.bytes(kMagic.data(), kMagic.size());
  out.u32(kCheckpointFormatVersion);
  out.i64(ckpt.epochs_completed);
  out.u32(static_cast<std::uint32_t>(n));
  for (const Matrix& t : ckpt.params.tensors) write_tensor(out, t);
  for (const Matrix& t : opt.first_moment) write_tensor(out, t);
  for (const Matrix& t : opt.second_moment) write_tensor(out, t);
  out.i64(opt.step);
  for (double v : {opt.base_lr, opt.weight_decay, opt.beta1, opt.beta2, opt.epsilon}) out.f64(v);
  out.finish();
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  BinaryReader in(path);
  std::array<char, 8> magic{};
  in.bytes(magic.data(), magic.size(), "magic");
  if (magic != kMagic) throw Error(ErrorCode::FormatError, "not a checkpoint file");
  const std::uint32_t version = in.u32("version");
  if (version != kCheckpointFormatVersion) {
    throw Error(ErrorCode::FormatError, "unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ckpt;
  ckpt.epochs_completed = in.i64("epochs_completed");
  const std::uint32_t n = in.u32("tensor count");
  if (n == 0 || n % 2 != 0) throw Error(ErrorCode::FormatError, "invalid tensor count " + std::to_string(n));
  for (std::uint32_t i = 0; i < n; ++i) ckpt.params.tensors.push_back(read_tensor(in));
  for (std::uint32_t i = 0; i < n; ++i) ckpt.optimizer.first_moment.push_back(read_tensor(in));
  for (std::uint32_t i = 0; i < n; ++i) ckpt.optimizer.second_moment.push_back(read_tensor(in));
  ckpt.optimizer.step = in.i64("step");
  ckpt.optimizer.base_lr = in.f64("base_lr");
  ckpt.optimizer.weight_decay = in.f64("weight_decay");
  ckpt.optimizer.beta1 = in.f64("beta1");
  ckpt.optimizer.beta2 = in.f64("beta2");
  ckpt.optimizer.epsilon = in.f64("epsilon");
  if (in.remaining() != 0) throw Error(ErrorCode::FormatError, "trailing bytes in checkpoint");
  try {
    ckpt.params.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::FormatError, std::string("checkpoint parameters invalid: ") + e.what());
  }
  return ckpt;
}

}  // namespace ccreid
