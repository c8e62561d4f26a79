#include "ccreid/tape.hpp"

#include <cmath>
#include <string>

namespace ccreid {

const Matrix& Var::value() const { return tape_->value(*this); }

Var Tape::leaf(Matrix value) {
  nodes_.push_back(Node{std::move(value), true, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), false, {}});
  return Var(this, nodes_.size() - 1);
}

void Tape::check_owner(Var v) const {
  if (v.tape() != this || v.id() >= nodes_.size()) {
    throw Error(ErrorCode::NotScalarRoot, "variable does not belong to this tape");
  }
}

Var Tape::record(Matrix value, std::initializer_list<Var> inputs, Pullback pullback) {
  bool needs = false;
  for (const Var& in : inputs) {
    check_owner(in);
    needs = needs || nodes_[in.id()].requires_grad;
  }
  nodes_.push_back(Node{std::move(value), needs, needs ? std::move(pullback) : Pullback{}});
  return Var(this, nodes_.size() - 1);
}

Gradients Tape::backward(Var root) {
  check_owner(root);
  const Matrix& root_value = nodes_[root.id()].value;
  if (root_value.rows() != 1 || root_value.cols() != 1) {
    throw Error(ErrorCode::NotScalarRoot, "root has shape " + std::to_string(root_value.rows()) + "x" +
                                              std::to_string(root_value.cols()));
  }
  std::vector<Matrix> grads;
  grads.reserve(nodes_.size());
  for (const Node& n : nodes_) grads.push_back(Matrix::Zero(n.value.rows(), n.value.cols()));
  grads[root.id()](0, 0) = 1.0;

  visit_order_.clear();
  for (std::size_t i = root.id() + 1; i-- > 0;) {
    const Node& n = nodes_[i];
    if (!n.pullback) continue;
    visit_order_.push_back(i);
    n.pullback(*this, grads[i], grads);
  }
  return Gradients(std::move(grads));
}

namespace ad {
namespace {

void require_same_tape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) {
    throw Error(ErrorCode::DimensionMismatch, "operands live on different tapes");
  }
}

void require_shape(bool ok, const char* op) {
  if (!ok) throw Error(ErrorCode::DimensionMismatch, std::string("shape mismatch in ") + op);
}

}  // namespace

Var matmul(Var a, Var b) {
  require_same_tape(a, b);
  require_shape(a.cols() == b.rows(), "matmul");
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() * b.value(), {a, b},
                          [ia, ib](const Tape& t, const Matrix& g, std::vector<Matrix>& grads) {
                            if (t.requires_grad_at(ia)) grads[ia].noalias() += g * t.value_at(ib).transpose();
                            if (t.requires_grad_at(ib)) grads[ib].noalias() += t.value_at(ia).transpose() * g;
                          });
}

Var matmul_bt(Var a, Var b) {
  require_same_tape(a, b);
  require_shape(a.cols() == b.cols(), "matmul_bt");
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() * b.value().transpose(), {a, b},
                          [ia, ib](const Tape& t, const Matrix& g, std::vector<Matrix>& grads) {
                            if (t.requires_grad_at(ia)) grads[ia].noalias() += g * t.value_at(ib);
                            if (t.requires_grad_at(ib)) grads[ib].noalias() += g.transpose() * t.value_at(ia);
                          });
}

Var add(Var a, Var b) {
  require_same_tape(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "add");
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() + b.value(), {a, b},
                          [ia, ib](const Tape&, const Matrix& g, std::vector<Matrix>& grads) {
                            grads[ia] += g;
                            grads[ib] += g;
                          });
}

Var sub(Var a, Var b) {
  require_same_tape(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "sub");
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(a.value() - b.value(), {a, b},
                          [ia, ib](const Tape&, const Matrix& g, std::vector<Matrix>& grads) {
                            grads[ia] += g;
                            grads[ib] -= g;
                          });
}

Var add_row(Var a, Var bias) {
  require_same_tape(a, bias);
  require_shape(bias.rows() == 1 && bias.cols() == a.cols(), "add_row");
  const auto ia = a.id(), ib = bias.id();
  Matrix out = a.value();
  out.rowwise() += bias.value().row(0);
  return a.tape()->record(std::move(out), {a, bias},
                          [ia, ib](const Tape&, const Matrix& g, std::vector<Matrix>& grads) {
                            grads[ia] += g;
                            grads[ib] += g.colwise().sum();
                          });
}

Var scale(Var a, double s) {
  const auto ia = a.id();
  return a.tape()->record(a.value() * s, {a},
                          [ia, s](const Tape&, const Matrix& g, std::vector<Matrix>& grads) { grads[ia] += s * g; });
}

Var hadamard(Var a, Var b) {
  require_same_tape(a, b);
  require_shape(a.rows() == b.rows() && a.cols() == b.cols(), "hadamard");
  const auto ia = a.id(), ib = b.id();
  return a.tape()->record(a.value().cwiseProduct(b.value()), {a, b},
                          [ia, ib](const Tape& t, const Matrix& g, std::vector<Matrix>& grads) {
                            grads[ia] += g.cwiseProduct(t.value_at(ib));
                            grads[ib] += g.cwiseProduct(t.value_at(ia));
                          });
}

Var tanh(Var a) {
  const auto ia = a.id();
  Matrix out = a.value().array().tanh().matrix();
  Tape* tape = a.tape();
  const std::size_t self = tape->size();
  return tape->record(std::move(out), {a},
                      [ia, self](const Tape& t, const Matrix& g, std::vector<Matrix>& grads) {
                        const Matrix& y = t.value_at(self);
                        grads[ia].array() += g.array() * (1.0 - y.array().square());
                      });
}

Var normalize_rows(Var a) {
  const Matrix& x = a.value();
  Vector norms = x.rowwise().norm();
  for (Eigen::Index r = 0; r < norms.size(); ++r) {
    if (!(norms[r] >= kZeroNormThreshold)) {
      throw Error(ErrorCode::ZeroVector, "row " + std::to_string(r) + " has norm " + std::to_string(norms[r]));
    }
  }
  Matrix out = norms.cwiseInverse().asDiagonal() * x;
  const auto ia = a.id();
  Tape* tape = a.tape();
  const std::size_t self = tape->size();
  return tape->record(std::move(out), {a},
                      [ia, self, norms = std::move(norms)](const Tape& t, const Matrix& g,
                                                           std::vector<Matrix>& grads) {
                        const Matrix& y = t.value_at(self);
                        const Vector proj = (g.cwiseProduct(y)).rowwise().sum();
                        grads[ia] += norms.cwiseInverse().asDiagonal() * (g - proj.asDiagonal() * y);
                      });
}

namespace {

Matrix row_log_softmax(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double shift = x.row(r).maxCoeff();
    const double lse = shift + std::log((x.row(r).array() - shift).exp().sum());
    out.row(r) = x.row(r).array() - lse;
  }
  return out;
}

}  // namespace

Var softmax_rows(Var a) {
  Matrix out = row_log_softmax(a.value()).array().exp().matrix();
  const auto ia = a.id();
  Tape* tape = a.tape();
  const std::size_t self = tape->size();
  return tape->record(std::move(out), {a},
                      [ia, self](const Tape& t, const Matrix& g, std::vector<Matrix>& grads) {
                        const Matrix& y = t.value_at(self);
                        const Vector inner = g.cwiseProduct(y).rowwise().sum();
                        grads[ia] += y.cwiseProduct(g - inner.replicate(1, g.cols()));
                      });
}

Var log_softmax_rows(Var a) {
  Matrix out = row_log_softmax(a.value());
  const auto ia = a.id();
  Tape* tape = a.tape();
  const std::size_t self = tape->size();
  return tape->record(std::move(out), {a},
                      [ia, self](const Tape& t, const Matrix& g, std::vector<Matrix>& grads) {
                        const Matrix probs = t.value_at(self).array().exp().matrix();
                        const Vector total = g.rowwise().sum();
                        grads[ia] += g - total.asDiagonal() * probs;
                      });
}

Var gather_rows(Var a, std::span<const Eigen::Index> rows) {
  const Matrix& x = a.value();
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require_shape(rows[i] >= 0 && rows[i] < x.rows(), "gather_rows");
    out.row(static_cast<Eigen::Index>(i)) = x.row(rows[i]);
  }
  const auto ia = a.id();
  std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  return a.tape()->record(std::move(out), {a},
                          [ia, idx = std::move(idx)](const Tape&, const Matrix& g, std::vector<Matrix>& grads) {
                            for (std::size_t i = 0; i < idx.size(); ++i) {
                              grads[ia].row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
                            }
                          });
}

Var pick(Var a, std::span<const std::pair<Eigen::Index, Eigen::Index>> entries) {
  const Matrix& x = a.value();
  Matrix out(static_cast<Eigen::Index>(entries.size()), 1);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto [r, c] = entries[i];
    require_shape(r >= 0 && r < x.rows() && c >= 0 && c < x.cols(), "pick");
    out(static_cast<Eigen::Index>(i), 0) = x(r, c);
  }
  const auto ia = a.id();
  std::vector<std::pair<Eigen::Index, Eigen::Index>> at(entries.begin(), entries.end());
  return a.tape()->record(std::move(out), {a},
                          [ia, at = std::move(at)](const Tape&, const Matrix& g, std::vector<Matrix>& grads) {
                            for (std::size_t i = 0; i < at.size(); ++i) {
                              grads[ia](at[i].first, at[i].second) += g(static_cast<Eigen::Index>(i), 0);
                            }
                          });
}

Var sum(Var a) {
  Matrix out(1, 1);
  out(0, 0) = a.value().sum();
  const auto ia = a.id();
  return a.tape()->record(std::move(out), {a},
                          [ia](const Tape&, const Matrix& g, std::vector<Matrix>& grads) {
                            grads[ia].array() += g(0, 0);
                          });
}

Var mean(Var a) {
  const auto n = static_cast<double>(a.value().size());
  if (n == 0) throw Error(ErrorCode::Empty, "mean of an empty matrix");
  return scale(sum(a), 1.0 / n);
}

}  // namespace ad
}  // namespace ccreid
