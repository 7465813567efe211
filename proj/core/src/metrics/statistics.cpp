#include "mappfn/metrics/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mappfn/common.hpp"

namespace mappfn::metrics {

std::vector<double> mid_ranks(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

RankSumResult wilcoxon_rank_sum(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.empty() || y.empty()) throw InvalidArgument("wilcoxon_rank_sum: both samples need at least one value");
  const auto n = static_cast<double>(x.size());
  const auto m = static_cast<double>(y.size());
  std::vector<double> pooled(x);
  pooled.insert(pooled.end(), y.begin(), y.end());
  const auto ranks = mid_ranks(pooled);
  const double rank_sum = std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(x.size()), 0.0);

  // Tie term sum(t^3 - t) over groups of equal values.
  std::vector<double> sorted(pooled);
  std::sort(sorted.begin(), sorted.end());
  double ties = 0.0;
  for (std::size_t i = 0; i < sorted.size();) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
    const auto t = static_cast<double>(j - i);
    ties += t * t * t - t;
    i = j;
  }
  const double total = n + m;
  RankSumResult r;
  r.u = rank_sum - n * (n + 1.0) / 2.0;
  const double mean = n * m / 2.0;
  const double var = n * m / 12.0 * ((total + 1.0) - ties / (total * (total - 1.0)));
  if (!(var > 0.0)) return r;
  const double dev = std::max(std::abs(r.u - mean) - 0.5, 0.0);
  r.z = dev / std::sqrt(var);
  r.p = std::min(1.0, std::erfc(r.z / std::sqrt(2.0)));
  return r;
}

std::vector<double> benjamini_hochberg(const std::vector<double>& p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const std::size_t idx = order[k];
    if (!(p[idx] >= 0.0 && p[idx] <= 1.0)) throw InvalidArgument("benjamini_hochberg: p-values must lie in [0, 1]");
    running = std::min(running, p[idx] * static_cast<double>(m) / static_cast<double>(k + 1));
    adjusted[idx] = running;
  }
  return adjusted;
}

}  // namespace mappfn::metrics
