#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "mappfn/diff/tape.hpp"

namespace mappfn::diff {

/// Named matrices in insertion order.
template <typename T>
class ParameterSet {
 public:
  using Matrix = Mat<T>;

  /// Returns the index of the new entry; duplicate names are rejected.
  std::size_t add(std::string name, Matrix value);

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] const std::string& name(std::size_t i) const { return names_.at(i); }
  [[nodiscard]] Matrix& value(std::size_t i) { return values_.at(i); }
  [[nodiscard]] const Matrix& value(std::size_t i) const { return values_.at(i); }
  [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const;
  /// Throws InvalidArgument for unknown names.
  [[nodiscard]] std::size_t index(std::string_view name) const;
  [[nodiscard]] Matrix& operator[](std::string_view name) { return values_[index(name)]; }
  [[nodiscard]] const Matrix& operator[](std::string_view name) const { return values_[index(name)]; }

  /// Total number of scalars.
  [[nodiscard]] std::size_t parameter_count() const;
  /// Same names and shapes, all zeros.
  [[nodiscard]] ParameterSet zeros_like() const;
  [[nodiscard]] bool same_layout(const ParameterSet& other) const;

  template <typename U>
  [[nodiscard]] ParameterSet<U> cast() const {
    ParameterSet<U> out;
    for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], values_[i].template cast<U>());
    return out;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Matrix> values_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Places every parameter on the tape, in order, as a variable (trainable) or
/// a constant.
template <typename T>
std::vector<Var> bind(Tape<T>& tape, const ParameterSet<T>& params, bool trainable);

/// Gradients of the bound parameters after Tape::backward(); parameters the
/// loss does not reach get zeros.
template <typename T>
ParameterSet<T> gradients(const Tape<T>& tape, const ParameterSet<T>& params, const std::vector<Var>& bound);

extern template class ParameterSet<float>;
extern template class ParameterSet<double>;

}  // namespace mappfn::diff
