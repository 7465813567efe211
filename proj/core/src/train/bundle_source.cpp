#include "mappfn/train/bundle_source.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

namespace mappfn::train {

std::vector<Eigen::Index> shared_row_subset(Eigen::Index available, int cells, Rng& rng) {
  std::vector<Eigen::Index> rows(static_cast<std::size_t>(available));
  std::iota(rows.begin(), rows.end(), Eigen::Index{0});
  if (cells <= 0 || cells >= available) return rows;
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(static_cast<std::size_t>(cells));
  std::sort(rows.begin(), rows.end());
  return rows;
}

Matrix take_rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

BundleSource::BundleSource(const data::Dataset& dataset, BundleOptions options,
                           const std::vector<data::ConditionKey>& pool)
    : dataset_(dataset), options_(options) {
  if (options_.context_size < 0) throw InvalidArgument("bundle source: negative context size");
  const std::set<data::ConditionKey> allowed(pool.begin(), pool.end());
  for (const auto& ctx : dataset_.contexts) {
    if (ctx.observational.rows() < 1) continue;
    Group g{&ctx, {}};
    for (const auto& cond : ctx.conditions) {
      if (pool.empty() || allowed.contains({ctx.context_id, cond.treatment_id})) g.conditions.push_back(&cond);
    }
    if (!g.conditions.empty()) groups_.push_back(std::move(g));
  }
  if (groups_.empty()) throw InvalidArgument("bundle source: no usable conditions");
}

model::ExperimentBundle BundleSource::draw(Rng& rng) const {
  const Group& g = groups_[std::uniform_int_distribution<std::size_t>(0, groups_.size() - 1)(rng)];
  int k = options_.context_size;
  if (options_.variable_context) k = std::uniform_int_distribution<int>(0, options_.context_size)(rng);
  k = std::min(k, static_cast<int>(g.conditions.size()) - 1);

  std::vector<std::size_t> picks(g.conditions.size());
  std::iota(picks.begin(), picks.end(), std::size_t{0});
  std::shuffle(picks.begin(), picks.end(), rng);
  const data::Condition& query = *g.conditions[picks[0]];

  Eigen::Index available = std::min(g.context->observational.rows(), query.samples.rows());
  for (int s = 1; s <= k; ++s) available = std::min(available, g.conditions[picks[static_cast<std::size_t>(s)]]->samples.rows());
  const auto rows = shared_row_subset(available, options_.cells, rng);

  model::ExperimentBundle b;
  b.y_obs = take_rows(g.context->observational, rows);
  for (int s = 1; s <= k; ++s) {
    const data::Condition& c = *g.conditions[picks[static_cast<std::size_t>(s)]];
    b.context.push_back({c.treatment_code, take_rows(c.samples, rows)});
  }
  b.query_treatment = query.treatment_code;
  b.target = take_rows(query.samples, rows);
  return b;
}

}  // namespace mappfn::train
