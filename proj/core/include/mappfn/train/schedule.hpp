#pragma once

#include <cstdint>

#include "mappfn/common.hpp"

namespace mappfn::train {

struct TrainConfig {
  int total_steps = 2000;
  double peak_lr = 1e-4;
  double warmup_frac = 0.01;
  double decay_frac = 0.20;
  double ema_decay = 0.999;
  int batch_size = 8;
  double condition_drop_prob = 0.2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double weight_decay = 0.01;
  double adam_eps = 1e-8;
  std::uint64_t seed = 0;
  /// Parallel workers for per-bundle forward/backward; results do not depend on it.
  int workers = 1;

  void validate() const;
};

/// Linear warmup to the peak over warmup_frac of the steps, constant until
/// (1 - decay_frac), then peak * sqrt((total - step) / (decay_frac * total)).
double wsd_lr(int step, const TrainConfig& cfg);

/// logistic(z) with z ~ N(0, 1).
double sample_time(Rng& rng);
double logistic(double z);

}  // namespace mappfn::train
