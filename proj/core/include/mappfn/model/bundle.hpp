#pragma once

#include <vector>

#include "mappfn/common.hpp"

namespace mappfn::model {

/// One context experiment: a treatment code and the cells measured under it.
struct ContextExperiment {
  Vector treatment;
  Matrix samples;
};

/// Conditioning set plus (for training) the query target batch.
struct ExperimentBundle {
  Matrix y_obs;
  std::vector<ContextExperiment> context;
  Vector query_treatment;
  /// M x d; empty at inference.
  Matrix target;

  [[nodiscard]] int context_size() const { return static_cast<int>(context.size()); }
};

/// Interpolant between noise and the query target.
struct NoisedQuery {
  Matrix y_tau;
  double tau = 0.0;
};

}  // namespace mappfn::model
