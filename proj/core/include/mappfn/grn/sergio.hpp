#pragma once

#include <cstdint>

#include "mappfn/common.hpp"
#include "mappfn/grn/grn.hpp"

namespace mappfn::grn {

struct SergioConfig {
  double hill_gamma = 2.0;
  double zeta = 1.0;  // process-noise scale
  double dt = 0.01;
  int burn_in_steps = 2000;

  double mu_outlier = 3.0;
  double mu_lib = 5.0;
  double sigma_lib = 0.5;
  double delta_dropout = 8.0;  // percentile of the logistic midpoint
  double xi_dropout = 60.0;    // logistic temperature
  double outlier_fraction = 0.01;

  bool apply_outliers = true;
  bool apply_library_size = true;
  bool apply_dropout = true;

  /// Every sampled field drawn uniformly from its prior range.
  static SergioConfig sample(Rng& rng);
};

/// Integrates dx = (P(x) - lambda x) dt + zeta (sqrt(P) dW1 - sqrt(lambda x) dW2)
/// with Euler-Maruyama, clamping at 0. Each cell is an independent chain started
/// at the deterministic steady state and recorded after burn-in; chain i uses
/// the stream derived from (seed, i).
Matrix simulate_expression(const Grn& grn, const SergioConfig& config, int cells, std::uint64_t seed,
                           int workers = 1);

/// Outlier genes, library-size scaling, logistic dropout and Poisson UMI
/// sampling, in that order. Returns non-negative integer counts.
Matrix apply_technical_noise(const Matrix& clean, const SergioConfig& config, std::uint64_t seed);

/// Linear-interpolated percentile (q in [0, 100]) of all entries.
double percentile(const Matrix& values, double q);

}  // namespace mappfn::grn
