#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mappfn/diff/tape.hpp"

namespace mappfn::diff {

struct GradCheckOptions {
  double step = 1e-4;
  /// Errors are |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double floor = 1e-6;
  /// Check at most this many randomly chosen entries; 0 checks every entry.
  std::size_t max_entries = 0;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_error = 0.0;
  std::size_t checked = 0;
  /// "input[row,col]" of the worst entry.
  std::string worst;
};

/// Builds a scalar (1 x 1) loss from the inputs placed on the tape as variables.
using ScalarFunction = std::function<Var(Tape<double>&, std::span<const Var>)>;

/// Compares reverse-mode gradients of f at `inputs` with central differences.
GradCheckResult check_gradients(const ScalarFunction& f, const std::vector<Mat<double>>& inputs,
                                const GradCheckOptions& options = {});

}  // namespace mappfn::diff
