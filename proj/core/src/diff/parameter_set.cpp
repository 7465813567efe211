#include "mappfn/diff/parameter_set.hpp"

namespace mappfn::diff {

template <typename T>
std::size_t ParameterSet<T>::add(std::string name, Matrix value) {
  if (index_.contains(name)) throw InvalidArgument("parameter set: duplicate name " + name);
  index_.emplace(name, values_.size());
  names_.push_back(std::move(name));
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

template <typename T>
std::optional<std::size_t> ParameterSet<T>::find(std::string_view name) const {
  const auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

template <typename T>
std::size_t ParameterSet<T>::index(std::string_view name) const {
  const auto i = find(name);
  if (!i) throw InvalidArgument("parameter set: unknown name " + std::string(name));
  return *i;
}

template <typename T>
std::size_t ParameterSet<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
  return n;
}

template <typename T>
ParameterSet<T> ParameterSet<T>::zeros_like() const {
  ParameterSet out;
  for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], Matrix::Zero(values_[i].rows(), values_[i].cols()));
  return out;
}

template <typename T>
bool ParameterSet<T>::same_layout(const ParameterSet& other) const {
  if (size() != other.size()) return false;
  for (std::size_t i = 0; i < size(); ++i) {
    if (names_[i] != other.names_[i] || values_[i].rows() != other.values_[i].rows() ||
        values_[i].cols() != other.values_[i].cols()) {
      return false;
    }
  }
  return true;
}

template <typename T>
std::vector<Var> bind(Tape<T>& tape, const ParameterSet<T>& params, bool trainable) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    vars.push_back(trainable ? tape.variable(params.value(i)) : tape.constant(params.value(i)));
  }
  return vars;
}

template <typename T>
ParameterSet<T> gradients(const Tape<T>& tape, const ParameterSet<T>& params, const std::vector<Var>& bound) {
  if (bound.size() != params.size()) throw InvalidArgument("gradients: binding does not match parameter set");
  ParameterSet<T> out;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& g = tape.grad(bound[i]);
    const auto& v = params.value(i);
    out.add(params.name(i), g.size() == 0 ? Mat<T>::Zero(v.rows(), v.cols()) : Mat<T>(g));
  }
  return out;
}

template class ParameterSet<float>;
template class ParameterSet<double>;
template std::vector<Var> bind<float>(Tape<float>&, const ParameterSet<float>&, bool);
template std::vector<Var> bind<double>(Tape<double>&, const ParameterSet<double>&, bool);
template ParameterSet<float> gradients<float>(const Tape<float>&, const ParameterSet<float>&, const std::vector<Var>&);
template ParameterSet<double> gradients<double>(const Tape<double>&, const ParameterSet<double>&,
                                                const std::vector<Var>&);

}  // namespace mappfn::diff
