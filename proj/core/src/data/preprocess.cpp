#include "mappfn/data/preprocess.hpp"

#include <algorithm>
#include <cmath>

namespace mappfn::data {

PreprocessResult normalize_log1p(const Matrix& counts) {
  if (counts.size() > 0 && counts.minCoeff() < 0.0) throw InvalidArgument("normalize_log1p: negative counts");
  PreprocessResult result;
  std::vector<double> totals;
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    const double total = counts.row(i).sum();
    if (total > 0.0) {
      result.kept_rows.push_back(i);
      totals.push_back(total);
    } else {
      ++result.dropped_cells;
    }
  }
  result.values.resize(static_cast<Eigen::Index>(result.kept_rows.size()), counts.cols());
  if (totals.empty()) return result;

  std::vector<double> sorted = totals;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t mid = sorted.size() / 2;
  const double median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);

  for (std::size_t r = 0; r < result.kept_rows.size(); ++r) {
    const auto row = static_cast<Eigen::Index>(r);
    result.values.row(row) = (counts.row(result.kept_rows[r]).array() * (median / totals[r])).log1p() / std::log(2.0);
  }
  return result;
}

}  // namespace mappfn::data
