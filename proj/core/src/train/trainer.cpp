#include "mappfn/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <string>

namespace mappfn::train {

AdamW::AdamW(const model::Params& like) : m_(like.zeros_like()), v_(like.zeros_like()) {}

void AdamW::step(model::Params& params, const diff::ParameterSet<float>& grads, double lr, const TrainConfig& cfg) {
  if (!params.same_layout(grads) || !params.same_layout(m_)) throw InvalidArgument("adamw: layout mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg.beta1, t_);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t_);
  const auto b1 = static_cast<float>(cfg.beta1);
  const auto b2 = static_cast<float>(cfg.beta2);
  const auto step_size = static_cast<float>(lr / bc1);
  const auto inv_sqrt_bc2 = static_cast<float>(1.0 / std::sqrt(bc2));
  const auto eps = static_cast<float>(cfg.adam_eps);
  const auto decay = static_cast<float>(1.0 - lr * cfg.weight_decay);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params.value(i).array();
    const auto g = grads.value(i).array();
    auto m = m_.value(i).array();
    auto v = v_.value(i).array();
    m = b1 * m + (1.0f - b1) * g;
    v = b2 * v + (1.0f - b2) * g.square();
    p = p * decay - step_size * m / (v.sqrt() * inv_sqrt_bc2 + eps);
  }
}

void ema_update(model::Params& ema, const model::Params& params, double decay) {
  if (!ema.same_layout(params)) throw InvalidArgument("ema: layout mismatch");
  const auto a = static_cast<float>(decay);
  for (std::size_t i = 0; i < ema.size(); ++i) {
    ema.value(i) = a * ema.value(i) + (1.0f - a) * params.value(i);
  }
}

namespace {

struct Sample {
  model::ExperimentBundle bundle;
  double tau = 0.0;
  Matrix y0;
  bool drop = false;
};

}  // namespace

TrainResult train_from(const model::ModelConfig& model_cfg, const TrainConfig& cfg, const BundleStream& stream,
                       model::Params params, model::Params ema, const StepCallback& on_step) {
  cfg.validate();
  model_cfg.validate();
  TrainResult result;
  AdamW opt(params);
  std::vector<Sample> batch(static_cast<std::size_t>(cfg.batch_size));
  std::vector<double> losses(batch.size());
  std::vector<diff::ParameterSet<float>> grads(batch.size());

  for (int step = 0; step < cfg.total_steps; ++step) {
    Rng rng(mix_seed(cfg.seed, step, 0, SeedRole::kConfig));
    std::bernoulli_distribution drop(cfg.condition_drop_prob);
    for (auto& s : batch) {
      s.bundle = stream(rng);
      s.tau = sample_time(rng);
      s.y0 = standard_normal(s.bundle.target.rows(), s.bundle.target.cols(), rng);
      s.drop = drop(rng);
    }
    try {
      parallel_for(batch.size(), cfg.workers, [&](std::size_t i) {
        diff::Tape<float> tape;
        const auto bound = diff::bind(tape, params, true);
        const diff::Var loss =
            model::cfm_loss<float>(tape, model_cfg, params, bound, batch[i].bundle, batch[i].tau, batch[i].y0,
                                   batch[i].drop);
        losses[i] = tape.value(loss)(0, 0);
        tape.backward(loss);
        grads[i] = diff::gradients(tape, params, bound);
      });
    } catch (const NumericalFailure& e) {
      throw NumericalFailure("non-finite loss at step " + std::to_string(step) + ": " + e.what());
    }
    double loss = 0.0;
    for (double l : losses) loss += l;
    loss /= static_cast<double>(batch.size());
    if (!std::isfinite(loss)) throw NumericalFailure("non-finite loss at step " + std::to_string(step));

    diff::ParameterSet<float>& total = grads[0];
    for (std::size_t i = 1; i < grads.size(); ++i) {
      for (std::size_t j = 0; j < total.size(); ++j) total.value(j) += grads[i].value(j);
    }
    const auto inv = 1.0f / static_cast<float>(batch.size());
    for (std::size_t j = 0; j < total.size(); ++j) total.value(j) *= inv;

    const double lr = wsd_lr(step, cfg);
    opt.step(params, total, lr, cfg);
    ema_update(ema, params, cfg.ema_decay);
    result.trace.push_back({step, loss, lr});
    if (on_step && !on_step(result.trace.back())) break;
  }
  result.params = std::move(params);
  result.ema = std::move(ema);
  return result;
}

TrainResult train(const model::ModelConfig& model_cfg, const TrainConfig& cfg, const BundleStream& stream,
                  const StepCallback& on_step) {
  model::Params params = model::build_model(model_cfg, cfg.seed);
  model::Params ema = params;
  return train_from(model_cfg, cfg, stream, std::move(params), std::move(ema), on_step);
}

void write_loss_trace(const std::filesystem::path& path, const std::vector<LossRecord>& trace) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write loss trace " + path.string());
  out << "step,loss,lr\n";
  char line[96];
  for (const auto& r : trace) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g\n", r.step, r.loss, r.lr);
    out << line;
  }
}

}  // namespace mappfn::train
