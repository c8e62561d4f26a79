#pragma once

#include <cstddef>
#include <functional>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "ccreid/numerics.hpp"

namespace ccreid {

class Tape;

/// Handle to a matrix-valued node recorded on a Tape. Cheap to copy; only
/// valid while its tape is alive.
class Var {
 public:
  Var() = default;

  std::size_t id() const noexcept { return id_; }
  Tape* tape() const noexcept { return tape_; }
  const Matrix& value() const;
  Eigen::Index rows() const { return value().rows(); }
  Eigen::Index cols() const { return value().cols(); }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Result of a backward pass: one gradient per recorded node, shaped like the
/// node's value. Leaves that do not influence the root get exact zeros.
class Gradients {
 public:
  const Matrix& operator[](Var node) const { return grads_.at(node.id()); }

 private:
  friend class Tape;
  explicit Gradients(std::vector<Matrix> grads) : grads_(std::move(grads)) {}
  std::vector<Matrix> grads_;
};

/// Reverse-mode differentiation tape over dense matrices.
///
/// Nodes are appended in evaluation order, so node ids are already a
/// topological order and backward simply walks the ids downwards. One tape is
/// built per mini-batch and discarded afterwards; it is not thread-safe.
class Tape {
 public:
  /// Accumulates d(root)/d(inputs) into `grads` given this node's gradient.
  using Pullback = std::function<void(const Tape&, const Matrix& out_grad, std::vector<Matrix>& grads)>;

  Var leaf(Matrix value);
  Var constant(Matrix value);

  /// Records an operation result. `pullback` may be empty when no input
  /// requires a gradient.
  Var record(Matrix value, std::initializer_list<Var> inputs, Pullback pullback);

  const Matrix& value(Var v) const { return nodes_.at(v.id()).value; }
  const Matrix& value_at(std::size_t id) const { return nodes_[id].value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id()).requires_grad; }
  bool requires_grad_at(std::size_t id) const { return nodes_[id].requires_grad; }
  std::size_t size() const noexcept { return nodes_.size(); }

  /// Throws NotScalarRoot unless `root` is a 1×1 node of this tape.
  Gradients backward(Var root);

  /// Node ids whose pullback ran during the last backward(), in visit order.
  const std::vector<std::size_t>& last_visit_order() const noexcept { return visit_order_; }

 private:
  struct Node {
    Matrix value;
    bool requires_grad = false;
    Pullback pullback;
  };

  void check_owner(Var v) const;

  std::vector<Node> nodes_;
  std::vector<std::size_t> visit_order_;
};

/// Differentiable operations. Shapes follow row-major batch convention: a
/// batch of n vectors of dimension d is an n×d matrix.
namespace ad {

Var matmul(Var a, Var b);
/// a · bᵀ
Var matmul_bt(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Adds the 1×c row `bias` to every row of `a`.
Var add_row(Var a, Var bias);
Var scale(Var a, double s);
Var hadamard(Var a, Var b);
Var tanh(Var a);
/// Row-wise L2 normalization; throws ZeroVector when a row has norm < 1e-12.
Var normalize_rows(Var a);
Var softmax_rows(Var a);
Var log_softmax_rows(Var a);
Var gather_rows(Var a, std::span<const Eigen::Index> rows);
/// Column vector of the selected (row, col) entries.
Var pick(Var a, std::span<const std::pair<Eigen::Index, Eigen::Index>> entries);
Var sum(Var a);
Var mean(Var a);

}  // namespace ad
}  // namespace ccreid
