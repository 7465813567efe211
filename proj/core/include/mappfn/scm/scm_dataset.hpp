#pragma once

#include <cstdint>

#include "mappfn/data/dataset.hpp"
#include "mappfn/scm/scm_prior.hpp"

namespace mappfn::scm {

struct ScmDatasetConfig {
  int dags = 1000;
  int nodes = 20;
  double edge_prob = 0.5;
  int samples = 500;
  /// Counterfactual pairing: one noise matrix shared by the observational batch
  /// and every intervention of a DAG.
  bool paired = false;
  std::uint64_t seed = 0;
  /// First context id; lets separate runs produce disjoint context ids.
  int first_context = 0;

  /// Desk-scale profile: 200 DAGs x 6 nodes x 100 samples.
  static ScmDatasetConfig toy();
};

/// One SCM with its observational batch and one intervention per node.
struct ScmDraw {
  WeightedDag dag;
  data::Context context;
};

/// Deterministic in (config, index); independent of the worker that runs it.
ScmDraw generate_scm_context(const ScmDatasetConfig& config, int index);

/// Intervenes on every node of every DAG. Output is identical for any worker count.
data::Dataset generate_scm_dataset(const ScmDatasetConfig& config, int workers = 1);

}  // namespace mappfn::scm
