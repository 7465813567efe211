#pragma once

#include <filesystem>
#include <functional>
#include <vector>

#include "mappfn/model/mappfn_model.hpp"
#include "mappfn/train/schedule.hpp"

namespace mappfn::train {

struct LossRecord {
  int step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct TrainResult {
  model::Params params;
  model::Params ema;
  std::vector<LossRecord> trace;
};

/// Produces one training bundle from the given generator.
using BundleStream = std::function<model::ExperimentBundle(Rng&)>;

/// Called after every step; return false to stop early.
using StepCallback = std::function<bool(const LossRecord&)>;

/// Optimizer state for AdamW with decoupled weight decay.
class AdamW {
 public:
  explicit AdamW(const model::Params& like);
  void step(model::Params& params, const diff::ParameterSet<float>& grads, double lr, const TrainConfig& cfg);
  [[nodiscard]] int steps() const { return t_; }

 private:
  diff::ParameterSet<float> m_;
  diff::ParameterSet<float> v_;
  int t_ = 0;
};

/// ema <- decay * ema + (1 - decay) * params.
void ema_update(model::Params& ema, const model::Params& params, double decay);

/// Flow-matching pretraining. Every step draws batch_size bundles with their
/// tau, noise and dropout flag from a step-indexed generator, so the loss
/// trace depends only on the seeds. Throws NumericalFailure naming the step on
/// a non-finite loss.
TrainResult train(const model::ModelConfig& model_cfg, const TrainConfig& cfg, const BundleStream& stream,
                  const StepCallback& on_step = {});

/// Same, continuing from existing parameters.
TrainResult train_from(const model::ModelConfig& model_cfg, const TrainConfig& cfg, const BundleStream& stream,
                       model::Params params, model::Params ema, const StepCallback& on_step = {});

/// CSV with header `step,loss,lr`.
void write_loss_trace(const std::filesystem::path& path, const std::vector<LossRecord>& trace);

}  // namespace mappfn::train
