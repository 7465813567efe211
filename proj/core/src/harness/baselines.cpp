#include "mappfn/harness/baselines.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace mappfn::harness {

namespace {

std::vector<Eigen::Index> shuffled(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

Matrix rows_of(const Matrix& m, const std::vector<Eigen::Index>& idx, std::size_t begin, std::size_t count) {
  Matrix out(static_cast<Eigen::Index>(count), m.cols());
  for (std::size_t i = 0; i < count; ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[begin + i]);
  return out;
}

}  // namespace

Matrix identity_baseline(const Matrix& obs, int m, Rng& rng) {
  if (obs.rows() < 1) throw InvalidArgument("identity baseline: empty observational batch");
  if (m < 1) throw InvalidArgument("identity baseline: m must be positive");
  if (m <= obs.rows()) return rows_of(obs, shuffled(obs.rows(), rng), 0, static_cast<std::size_t>(m));
  std::uniform_int_distribution<Eigen::Index> pick(0, obs.rows() - 1);
  Matrix out(m, obs.cols());
  for (int i = 0; i < m; ++i) out.row(i) = obs.row(pick(rng));
  return out;
}

HeldOutSplit split_interventional(const Matrix& samples, int m, Rng& rng) {
  const Eigen::Index n = samples.rows();
  if (n < 2) throw InvalidArgument("split_interventional: need at least two samples");
  if (m < 1) throw InvalidArgument("split_interventional: m must be positive");
  const auto idx = shuffled(n, rng);
  HeldOutSplit s;
  if (n >= 2 * static_cast<Eigen::Index>(m)) {
    s.eval = rows_of(samples, idx, 0, static_cast<std::size_t>(m));
    s.reference = rows_of(samples, idx, static_cast<std::size_t>(m), static_cast<std::size_t>(m));
    return s;
  }
  const auto half = static_cast<std::size_t>(n / 2);
  s.eval = rows_of(samples, idx, 0, half);
  s.with_replacement = true;
  std::uniform_int_distribution<std::size_t> pick(half, static_cast<std::size_t>(n) - 1);
  s.reference.resize(m, samples.cols());
  for (int i = 0; i < m; ++i) s.reference.row(i) = samples.row(idx[pick(rng)]);
  return s;
}

}  // namespace mappfn::harness
