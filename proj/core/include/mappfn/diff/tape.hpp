#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "mappfn/common.hpp"

namespace mappfn::diff {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Handle to a node on a Tape.
struct Var {
  std::int32_t id = -1;
  [[nodiscard]] bool valid() const { return id >= 0; }
};

/// Reverse-mode tape over dense matrices. Nodes are appended in evaluation
/// order, so a reverse sweep visits every node after all of its consumers.
template <typename T>
class Tape {
 public:
  using Matrix = Mat<T>;
  /// Propagates the node's output gradient into its inputs.
  using Backward = std::function<void(Tape&, const Matrix& out_grad)>;

  Var constant(Matrix value);
  Var variable(Matrix value);

  /// Records an operation result. The node requires a gradient iff any input
  /// does; the backward rule is dropped otherwise.
  Var record(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var record(Matrix value, std::span<const Var> inputs, Backward backward);

  /// Records a result that has no backward rule. Reaching it during backward()
  /// raises UnsupportedOperation.
  Var record_opaque(Matrix value, std::span<const Var> inputs);

  [[nodiscard]] const Matrix& value(Var v) const { return nodes_[index(v)].value; }
  /// Empty (0 x 0) if no gradient reached the node.
  [[nodiscard]] const Matrix& grad(Var v) const { return nodes_[index(v)].grad; }
  [[nodiscard]] bool requires_grad(Var v) const { return nodes_[index(v)].requires_grad; }
  [[nodiscard]] std::size_t size() const { return nodes_.size(); }

  /// grad(v) += g, allocating on first use; no-op for nodes without gradient.
  template <typename Expr>
  void accumulate(Var v, const Eigen::MatrixBase<Expr>& g) {
    Node& node = nodes_[index(v)];
    if (!node.requires_grad) return;
    if (node.grad.size() == 0) {
      node.grad = g;
    } else {
      node.grad += g;
    }
  }

  /// Seeds d(output)/d(output) = 1 for a 1 x 1 output and sweeps backwards.
  void backward(Var output);

  void clear() { nodes_.clear(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    Backward backward;
    bool requires_grad = false;
    bool opaque = false;
  };

  std::size_t index(Var v) const;

  std::vector<Node> nodes_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace mappfn::diff
