#include "mappfn/scm/scm_prior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <Eigen/LU>

namespace mappfn::scm {

int WeightedDag::edge_count() const {
  return static_cast<int>((weights.array() != 0.0).count());
}

WeightedDag sample_dag(int nodes, double edge_prob, Rng& rng, bool normalize) {
  if (nodes < 1) throw InvalidArgument("sample_dag: node count must be >= 1");
  if (!(edge_prob >= 0.0 && edge_prob <= 1.0)) {
    throw InvalidArgument("sample_dag: edge probability must lie in [0, 1]");
  }
  WeightedDag dag;
  dag.node_permutation.resize(static_cast<std::size_t>(nodes));
  std::iota(dag.node_permutation.begin(), dag.node_permutation.end(), 0);
  std::shuffle(dag.node_permutation.begin(), dag.node_permutation.end(), rng);

  std::bernoulli_distribution has_edge(edge_prob);
  std::uniform_real_distribution<double> magnitude(0.5, 2.0);
  std::bernoulli_distribution negative(0.5);

  dag.weights = Matrix::Zero(nodes, nodes);
  // Position a precedes position b in the permutation: only edges a -> b.
  for (int a = 0; a < nodes; ++a) {
    for (int b = a + 1; b < nodes; ++b) {
      if (!has_edge(rng)) continue;
      const double w = magnitude(rng);
      const int parent = dag.node_permutation[static_cast<std::size_t>(a)];
      const int child = dag.node_permutation[static_cast<std::size_t>(b)];
      dag.weights(child, parent) = negative(rng) ? -w : w;
    }
  }
  if (normalize) dag.weights = normalize_weights(dag.weights);
  return dag;
}

Matrix transfer_matrix(const Matrix& weights) {
  const auto d = weights.rows();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(d, d) - Eigen::MatrixXd(weights);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw NumericalFailure("transfer_matrix: I - W is singular");
  return lu.inverse();
}

Matrix normalize_weights(const Matrix& weights) {
  if (weights.rows() != weights.cols()) throw InvalidArgument("normalize_weights: W must be square");
  if (weights.diagonal().cwiseAbs().maxCoeff() != 0.0) {
    throw InvalidArgument("normalize_weights: W must have a zero diagonal");
  }
  const Matrix transfer = transfer_matrix(weights);
  const Vector row_norms = transfer.rowwise().squaredNorm();
  Matrix out = weights;
  for (Eigen::Index k = 0; k < out.rows(); ++k) out.row(k) /= std::sqrt(row_norms(k));
  return out;
}

std::vector<int> topological_order(const Matrix& weights) {
  const auto d = static_cast<int>(weights.rows());
  std::vector<int> in_degree(static_cast<std::size_t>(d), 0);
  for (int k = 0; k < d; ++k) {
    for (int j = 0; j < d; ++j) {
      if (weights(k, j) != 0.0) ++in_degree[static_cast<std::size_t>(k)];
    }
  }
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(d));
  std::vector<int> ready;
  for (int k = d - 1; k >= 0; --k) {
    if (in_degree[static_cast<std::size_t>(k)] == 0) ready.push_back(k);
  }
  while (!ready.empty()) {
    const int j = ready.back();
    ready.pop_back();
    order.push_back(j);
    for (int k = d - 1; k >= 0; --k) {
      if (weights(k, j) != 0.0 && --in_degree[static_cast<std::size_t>(k)] == 0) ready.push_back(k);
    }
  }
  if (static_cast<int>(order.size()) != d) throw NumericalFailure("topological_order: graph has a cycle");
  return order;
}

std::vector<bool> descendants(const WeightedDag& dag, int node) {
  const int d = dag.nodes();
  if (node < 0 || node >= d) throw InvalidArgument("descendants: node out of range");
  std::vector<bool> reached(static_cast<std::size_t>(d), false);
  std::vector<int> stack{node};
  reached[static_cast<std::size_t>(node)] = true;
  while (!stack.empty()) {
    const int j = stack.back();
    stack.pop_back();
    for (int k = 0; k < d; ++k) {
      if (dag.weights(k, j) != 0.0 && !reached[static_cast<std::size_t>(k)]) {
        reached[static_cast<std::size_t>(k)] = true;
        stack.push_back(k);
      }
    }
  }
  return reached;
}

Intervention sample_intervention(int target, Rng& rng) {
  std::uniform_real_distribution<double> value(0.5, 1.5);
  return Intervention{target, value(rng)};
}

WeightedDag apply_intervention(const WeightedDag& dag, const Intervention& iv) {
  if (iv.target < 0 || iv.target >= dag.nodes()) {
    throw InvalidArgument("apply_intervention: target " + std::to_string(iv.target) +
                          " out of range for d=" + std::to_string(dag.nodes()));
  }
  WeightedDag mutilated = dag;
  mutilated.weights.row(iv.target).setZero();
  return mutilated;
}

Matrix draw_noise(int n, int d, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("draw_noise: sample count must be >= 1");
  Rng rng(seed);
  return standard_normal(n, d, rng);
}

Matrix propagate(const WeightedDag& dag, const Matrix& noise, const std::optional<Intervention>& clamp) {
  const int d = dag.nodes();
  if (noise.cols() != d) throw InvalidArgument("propagate: noise width does not match node count");
  const std::vector<int> order = topological_order(dag.weights);
  Matrix z = Matrix::Zero(noise.rows(), d);
  for (const int k : order) {
    if (clamp && clamp->target == k) {
      z.col(k).setConstant(clamp->value);
      continue;
    }
    z.col(k) = noise.col(k);
    for (int j = 0; j < d; ++j) {
      const double w = dag.weights(k, j);
      if (w != 0.0) z.col(k) += w * z.col(j);
    }
  }
  return z;
}

void standardize_columns(Matrix& values) {
  const auto n = values.rows();
  if (n < 2) return;
  for (Eigen::Index c = 0; c < values.cols(); ++c) {
    // A clamped column is exactly constant, but its computed mean need not be,
    // which would leave a variance of rounding size.
    if (values.col(c).minCoeff() == values.col(c).maxCoeff()) continue;
    const double mean = values.col(c).mean();
    const double var = (values.col(c).array() - mean).square().sum() / static_cast<double>(n - 1);
    if (var > 0.0) values.col(c) /= std::sqrt(var);
  }
}

SampleBatch sample_observational(const WeightedDag& dag, const Matrix& noise, std::uint64_t noise_seed,
                                 const SampleOptions& options) {
  SampleBatch batch;
  batch.kind = SampleKind::kObservational;
  batch.noise_seed = noise_seed;
  batch.values = propagate(dag, noise);
  if (options.standardize) standardize_columns(batch.values);
  return batch;
}

SampleBatch sample_observational(const WeightedDag& dag, int n, std::uint64_t seed,
                                 const SampleOptions& options) {
  return sample_observational(dag, draw_noise(n, dag.nodes(), seed), seed, options);
}

SampleBatch sample_interventional(const WeightedDag& dag, const Intervention& iv, int n, std::uint64_t seed,
                                  const Matrix* paired_noise, const SampleOptions& options) {
  const WeightedDag mutilated = apply_intervention(dag, iv);
  if (paired_noise != nullptr && (paired_noise->rows() != n || paired_noise->cols() != dag.nodes())) {
    throw InvalidArgument("sample_interventional: paired noise must be n x d");
  }
  SampleBatch batch;
  batch.kind = SampleKind::kInterventional;
  batch.intervention = iv;
  batch.noise_seed = seed;
  batch.values = paired_noise != nullptr ? propagate(mutilated, *paired_noise, iv)
                                         : propagate(mutilated, draw_noise(n, dag.nodes(), seed), iv);
  if (options.standardize) standardize_columns(batch.values);
  return batch;
}

Vector encode_treatment(const Intervention& iv, int d) {
  if (iv.target < 0 || iv.target >= d) throw InvalidArgument("encode_treatment: target out of range");
  Vector code = Vector::Zero(d);
  code(iv.target) = iv.value;
  return code;
}

Intervention decode_treatment(const Vector& code) {
  Eigen::Index hot = 0;
  code.cwiseAbs().maxCoeff(&hot);
  return Intervention{static_cast<int>(hot), code(hot)};
}

}  // namespace mappfn::scm
