#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mappfn/data/dataset.hpp"
#include "mappfn/harness/splits.hpp"
#include "mappfn/metrics/distances.hpp"
#include "mappfn/metrics/report.hpp"
#include "mappfn/model/mappfn_model.hpp"
#include "mappfn/train/generate.hpp"

namespace mappfn::harness {

enum class PredictorKind { kModel, kIdentity, kObserved };

struct Predictor {
  PredictorKind kind = PredictorKind::kModel;
  std::string name;
  /// Training seed of the model, reported per row.
  int seed = 0;
  const model::ModelConfig* config = nullptr;
  const model::Params* params = nullptr;
  train::GuidanceConfig guidance;

  static Predictor identity() { return {PredictorKind::kIdentity, "identity", 0, nullptr, nullptr, {}}; }
  static Predictor observed() { return {PredictorKind::kObserved, "observed", 0, nullptr, nullptr, {}}; }
  static Predictor model(std::string name, const model::ModelConfig& cfg, const model::Params& params, int seed,
                         const train::GuidanceConfig& guidance = {}) {
    return {PredictorKind::kModel, std::move(name), seed, &cfg, &params, guidance};
  }
};

struct EvalOptions {
  SplitMode mode = SplitMode::kFewShot;
  /// Predicted samples per condition; 0 uses half of the condition's samples.
  int m = 0;
  /// Context experiments given to the model; -1 uses as many as available.
  int context_size = -1;
  /// Also draw context from the other test conditions of the context (never the query).
  bool context_from_test = false;
  /// Rows of the observational and context batches given to the model; 0 keeps all.
  int cells = 0;
  metrics::MetricConfig metrics;
  std::uint64_t seed = 0;
  int workers = 1;
  /// Report label; defaults to the split mode.
  std::string setting;
  bool compute_deg = true;
};

/// Evaluates every predictor on every test condition. Per condition the
/// interventional samples are split into a ground-truth half and a reference
/// half (the observed baseline); the identity baseline returns the
/// observational batch. Model predictors condition on the observational batch
/// and the context experiments allowed by the split mode and integrate the
/// guided flow. Rank_T is computed across all test conditions per predictor.
metrics::MetricReport run_eval(const std::vector<Predictor>& predictors, const data::Dataset& dataset,
                               const Splits& splits, const EvalOptions& options);

/// Runs each split (one holdout context each) and concatenates the rows.
metrics::MetricReport run_eval(const std::vector<Predictor>& predictors, const data::Dataset& dataset,
                               const std::vector<Splits>& splits, const EvalOptions& options);

/// Splits for each holdout context with the same mode, fraction and seed.
std::vector<Splits> make_holdout_splits(const data::Dataset& dataset, const std::vector<int>& holdout_contexts,
                                        const SplitSpec& spec);

/// The inference bundle of one test condition, as run_eval builds it.
model::ExperimentBundle eval_bundle(const data::Dataset& dataset, const Splits& splits, const data::ConditionKey& key,
                                    const EvalOptions& options, int max_context, Rng& rng);

}  // namespace mappfn::harness
