#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mappfn/common.hpp"

namespace mappfn::scm {

/// Linear additive-noise SCM. weights(k, j) != 0 encodes the edge j -> k, so a
/// sample solves z = W z + eps.
struct WeightedDag {
  Matrix weights;
  /// Random node ordering used to build the upper-triangular mask; it is a
  /// topological order of the graph (parents precede children).
  std::vector<int> node_permutation;

  [[nodiscard]] int nodes() const { return static_cast<int>(weights.rows()); }
  [[nodiscard]] int edge_count() const;
};

/// Hard intervention do(z_target := value).
struct Intervention {
  int target = 0;
  double value = 1.0;
};

enum class SampleKind : std::uint32_t { kObservational = 0, kInterventional = 1 };

struct SampleBatch {
  Matrix values;
  SampleKind kind = SampleKind::kObservational;
  std::optional<Intervention> intervention;
  std::uint64_t noise_seed = 0;
};

struct SampleOptions {
  /// Rescale every non-constant column to unit sample variance.
  bool standardize = true;
};

/// Erdos-Renyi DAG over a random permutation with weights drawn from
/// Unif([-2,-0.5] U [0.5,2]); normalized with normalize_weights unless
/// `normalize` is false.
WeightedDag sample_dag(int nodes, double edge_prob, Rng& rng, bool normalize = true);

/// Returns D^{-1/2} W with D = diag(T T^T) and T = (I - W)^{-1}.
Matrix normalize_weights(const Matrix& weights);

/// (I - W)^{-1}. Throws NumericalFailure if I - W is singular.
Matrix transfer_matrix(const Matrix& weights);

/// Topological order of the graph encoded by `weights`; throws NumericalFailure
/// if the graph has a cycle.
std::vector<int> topological_order(const Matrix& weights);

/// descendants[k] is true iff k is reachable from `node` (node itself included).
std::vector<bool> descendants(const WeightedDag& dag, int node);

/// Draws c ~ Unif([0.5, 1.5]) for the given target.
Intervention sample_intervention(int target, Rng& rng);

/// Removes every incoming edge of the intervened node. The node is clamped to
/// iv.value during sampling.
WeightedDag apply_intervention(const WeightedDag& dag, const Intervention& iv);

/// n x d matrix of i.i.d. standard-normal noise drawn from `seed`.
Matrix draw_noise(int n, int d, std::uint64_t seed);

/// Propagates each noise row through the SCM: z = (I - W)^{-1} eps, with the
/// optional clamp overriding the intervened node.
Matrix propagate(const WeightedDag& dag, const Matrix& noise,
                 const std::optional<Intervention>& clamp = std::nullopt);

/// Divides every column by its sample standard deviation (n - 1 denominator).
/// Constant columns are left untouched.
void standardize_columns(Matrix& values);

SampleBatch sample_observational(const WeightedDag& dag, int n, std::uint64_t seed,
                                 const SampleOptions& options = {});

/// Observational batch from an explicit noise matrix (used for counterfactual pairing).
SampleBatch sample_observational(const WeightedDag& dag, const Matrix& noise,
                                 std::uint64_t noise_seed, const SampleOptions& options = {});

/// Samples the mutilated SCM. With `paired_noise`, the shared noise matrix is
/// reused (counterfactual pairing); otherwise fresh noise is drawn from `seed`.
SampleBatch sample_interventional(const WeightedDag& dag, const Intervention& iv, int n,
                                  std::uint64_t seed, const Matrix* paired_noise = nullptr,
                                  const SampleOptions& options = {});

/// Zero vector except position `target`, which holds the intervention value.
Vector encode_treatment(const Intervention& iv, int d);

/// Inverse of encode_treatment: the hot index and its value.
Intervention decode_treatment(const Vector& code);

}  // namespace mappfn::scm
