#include "mappfn/diff/tape.hpp"

#include <string>

namespace mappfn::diff {

template <typename T>
std::size_t Tape<T>::index(Var v) const {
  if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) {
    throw InvalidArgument("tape: invalid variable handle " + std::to_string(v.id));
  }
  return static_cast<std::size_t>(v.id);
}

template <typename T>
Var Tape<T>::constant(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, false, false});
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::variable(Matrix value) {
  nodes_.push_back(Node{std::move(value), {}, {}, true, false});
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::record(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()), std::move(backward));
}

template <typename T>
Var Tape<T>::record(Matrix value, std::span<const Var> inputs, Backward backward) {
  bool needs = false;
  for (const Var v : inputs) {
    if (v.valid() && nodes_[index(v)].requires_grad) needs = true;
  }
  if (!value.allFinite()) throw NumericalFailure("tape: non-finite value produced");
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(backward) : Backward{}, needs, false});
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
Var Tape<T>::record_opaque(Matrix value, std::span<const Var> inputs) {
  bool needs = false;
  for (const Var v : inputs) {
    if (v.valid() && nodes_[index(v)].requires_grad) needs = true;
  }
  nodes_.push_back(Node{std::move(value), {}, {}, needs, needs});
  return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
}

template <typename T>
void Tape<T>::backward(Var output) {
  Node& out = nodes_[index(output)];
  if (out.value.size() != 1) throw InvalidArgument("tape: backward() needs a scalar (1 x 1) output");
  if (!out.requires_grad) return;
  out.grad = Matrix::Ones(1, 1);
  for (auto i = static_cast<std::ptrdiff_t>(index(output)); i >= 0; --i) {
    Node& node = nodes_[static_cast<std::size_t>(i)];
    if (!node.requires_grad || node.grad.size() == 0) continue;
    if (node.opaque) {
      throw UnsupportedOperation("tape: node " + std::to_string(i) + " has no backward rule");
    }
    if (node.backward) {
      // The rule may append to nothing but gradients of earlier nodes, so a
      // reference to this node's gradient stays valid.
      node.backward(*this, node.grad);
    }
  }
}

template class Tape<float>;
template class Tape<double>;

}  // namespace mappfn::diff
