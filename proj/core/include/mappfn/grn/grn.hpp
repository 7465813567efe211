#pragma once

#include <vector>

#include "mappfn/common.hpp"

namespace mappfn::grn {

/// Structural hyperparameters of the scale-free network generator.
struct GrnConfig {
  int genes = 50;
  int k_groups = 1;           // number of modules, {1, 2, 3}
  double p_sparsity = 2.0;    // average regulators per gene
  double delta_in = 100.0;    // in-degree uniformity
  double delta_out = 10.0;    // out-degree uniformity
  double w_modularity = 1.0;  // within-module attachment multiplier

  /// Each field drawn uniformly from its prior range.
  static GrnConfig sample(int genes, Rng& rng);
  void validate() const;
};

struct Edge {
  int regulator = 0;
  int target = 0;
  /// Signed interaction strength: positive activates, negative represses.
  double strength = 0.0;
  /// Hill half-response; set by calibrate_half_responses.
  double half_response = 1.0;
};

struct Grn {
  int genes = 0;
  std::vector<Edge> edges;
  /// Basal production b for source genes (no regulators); 0 elsewhere.
  std::vector<double> basal_rate;
  std::vector<double> decay;
  std::vector<int> group;

  [[nodiscard]] std::vector<int> in_degree() const;
  [[nodiscard]] std::vector<int> out_degree() const;
  /// Genes with in-degree 0 and out-degree >= 1.
  [[nodiscard]] std::vector<int> master_regulators() const;
  [[nodiscard]] bool is_acyclic() const;
  /// Topological order of the genes; throws NumericalFailure on a cycle.
  [[nodiscard]] std::vector<int> topological_order() const;
};

/// Preferential-attachment network. The number of edges is Poisson(p * genes).
/// For each edge a target i is drawn with weight (in_deg(i) + delta_in), then a
/// regulator j != i with weight (out_deg(j) + delta_out) * m, where m is
/// w_modularity for genes in the same module and 1 otherwise. Strengths are
/// Unif([1, 5]) with a random sign, decay rates Unif([0.5, 1]).
Grn sample_grn(const GrnConfig& config, Rng& rng);

/// Repeatedly deletes the minimum-|strength| edge of a detected cycle until the
/// graph is acyclic.
Grn break_cycles(Grn grn);

/// If no master regulator exists, promotes ceil(0.05 * genes) genes with the
/// lowest in-degree among genes with outgoing edges by deleting their incoming
/// edges. Throws InvalidArgument if no gene has an outgoing edge.
Grn ensure_master_regulators(Grn grn);

/// Draws b ~ Unif([0.5, 2] U [3, 5]) for every gene without regulators.
void assign_production_rates(Grn& grn, Rng& rng);

/// Noise-free steady state in topological order: x_i = P_i(x) / lambda_i.
std::vector<double> deterministic_steady_state(const Grn& grn, double hill_gamma);

/// Sets every edge's half-response to the deterministic steady-state level of
/// its regulator in the unperturbed network.
void calibrate_half_responses(Grn& grn);

/// sample -> break_cycles -> ensure_master_regulators -> production rates ->
/// half-responses. The result is ready for simulation.
Grn build_network(const GrnConfig& config, Rng& rng);

/// Removes every edge incident to `gene` and zeroes its production.
Grn knockout(const Grn& grn, int gene);

/// Hill activation x^gamma / (h^gamma + x^gamma); 0 for x <= 0.
double hill(double x, double half_response, double gamma);

}  // namespace mappfn::grn
