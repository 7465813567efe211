#pragma once

#include "mappfn/common.hpp"

namespace mappfn::harness {

/// m observational rows: a random subset without replacement when m does not
/// exceed the batch (the whole batch when equal), with replacement otherwise.
Matrix identity_baseline(const Matrix& obs, int m, Rng& rng);

/// A condition's interventional samples divided into a ground-truth half and
/// a disjoint reference half (the observed baseline's prediction).
struct HeldOutSplit {
  Matrix eval;
  Matrix reference;
  /// Set when fewer than 2m samples forced a with-replacement reference.
  bool with_replacement = false;
};

/// With n >= 2m samples: eval and reference are disjoint m-row subsets.
/// Otherwise eval is a random floor(n/2) half and the reference draws m rows
/// with replacement from the other half.
HeldOutSplit split_interventional(const Matrix& samples, int m, Rng& rng);

}  // namespace mappfn::harness
