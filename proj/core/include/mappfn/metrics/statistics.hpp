#pragma once

#include <vector>

namespace mappfn::metrics {

struct RankSumResult {
  /// Mann-Whitney U of the first sample (rank sum minus n(n+1)/2).
  double u = 0.0;
  double z = 0.0;
  /// Two-sided p-value.
  double p = 1.0;
};

/// Wilcoxon rank-sum test with mid-ranks, tie-corrected normal approximation
/// and a 0.5 continuity correction. Identical pooled values give p = 1.
RankSumResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y);

/// Benjamini-Hochberg adjusted p-values, in input order.
std::vector<double> benjamini_hochberg(const std::vector<double>& p);

/// Mid-ranks (1-based) of the values.
std::vector<double> mid_ranks(const std::vector<double>& values);

}  // namespace mappfn::metrics
