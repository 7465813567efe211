#pragma once

#include <vector>

#include "mappfn/common.hpp"

namespace mappfn::data {

struct PreprocessResult {
  Matrix values;
  /// Indices (into the input) of the cells that were kept.
  std::vector<Eigen::Index> kept_rows;
  int dropped_cells = 0;
};

/// Total-count normalization to the median cell total followed by log2(1 + x):
/// x_tilde = log2(1 + m * x / |x|_1) with m the median total over kept cells.
/// All-zero cells are dropped and counted. Throws InvalidArgument on negative counts.
PreprocessResult normalize_log1p(const Matrix& counts);

}  // namespace mappfn::data
