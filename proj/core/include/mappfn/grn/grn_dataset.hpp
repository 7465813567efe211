#pragma once

#include <cstdint>

#include "mappfn/data/dataset.hpp"
#include "mappfn/grn/grn.hpp"
#include "mappfn/grn/sergio.hpp"

namespace mappfn::grn {

struct GrnDatasetConfig {
  int grns = 6000;
  int genes = 50;
  int cells = 200;
  /// Reuse the simulator seed across treatments of a network.
  bool paired = false;
  /// Median-count normalization + log2(1 + x) on the noisy counts.
  bool preprocess = false;
  std::uint64_t seed = 0;
  int first_context = 0;
  /// Overrides the CLE step count (tests use shorter burn-in).
  int burn_in_steps = 2000;
};

struct GrnDraw {
  Grn network;
  GrnConfig structure;
  SergioConfig simulation;
  data::Context context;
};

/// Samples one network with its hyperparameters, then simulates the control and
/// one knockout per gene.
GrnDraw generate_grn_context(const GrnDatasetConfig& config, int index);

data::Dataset generate_grn_dataset(const GrnDatasetConfig& config, int workers = 1);

}  // namespace mappfn::grn
