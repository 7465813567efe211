#include "mappfn/train/schedule.hpp"

#include <cmath>
#include <random>
#include <string>

namespace mappfn::train {

void TrainConfig::validate() const {
  if (total_steps < 1) throw InvalidArgument("train config: total_steps must be positive");
  if (!(warmup_frac > 0.0 && warmup_frac < 1.0) || !(decay_frac > 0.0 && decay_frac < 1.0) ||
      warmup_frac + decay_frac > 1.0) {
    throw InvalidArgument("train config: warmup_frac and decay_frac must lie in (0, 1) and sum to at most 1");
  }
  if (!(peak_lr > 0.0)) throw InvalidArgument("train config: peak_lr must be positive");
  if (!(ema_decay >= 0.0 && ema_decay < 1.0)) throw InvalidArgument("train config: ema_decay must lie in [0, 1)");
  if (batch_size < 1) throw InvalidArgument("train config: batch_size must be positive");
  if (!(condition_drop_prob >= 0.0 && condition_drop_prob < 1.0)) {
    throw InvalidArgument("train config: condition_drop_prob must lie in [0, 1)");
  }
  if (workers < 1) throw InvalidArgument("train config: workers must be positive");
}

double wsd_lr(int step, const TrainConfig& cfg) {
  if (step < 0 || step > cfg.total_steps) {
    throw InvalidArgument("wsd_lr: step " + std::to_string(step) + " outside [0, total]");
  }
  const double total = cfg.total_steps;
  const double warmup = cfg.warmup_frac * total;
  const double decay_start = (1.0 - cfg.decay_frac) * total;
  if (step < warmup) return cfg.peak_lr * step / warmup;
  if (step <= decay_start) return cfg.peak_lr;
  return cfg.peak_lr * std::sqrt((total - step) / (cfg.decay_frac * total));
}

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double sample_time(Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  return logistic(n(rng));
}

}  // namespace mappfn::train
