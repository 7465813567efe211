#include "mappfn/harness/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "mappfn/harness/baselines.hpp"
#include "mappfn/metrics/deg.hpp"
#include "mappfn/train/bundle_source.hpp"

namespace mappfn::harness {

namespace {

struct ConditionOutput {
  Matrix truth;
  Matrix prediction;
  metrics::MetricRow row;
};

void append_flag(std::string& flags, const std::string& flag) {
  if (!flags.empty()) flags += ';';
  flags += flag;
}

std::vector<data::ConditionKey> context_pool(const Splits& splits, const data::ConditionKey& key,
                                             const EvalOptions& options) {
  std::vector<data::ConditionKey> pool;
  if (options.mode == SplitMode::kFewShot) {
    for (const auto& c : splits.holdout_rest) {
      if (c.context_id == key.context_id) pool.push_back(c);
    }
  }
  if (options.context_from_test) {
    for (const auto& c : splits.test) {
      if (c.context_id == key.context_id && c != key) pool.push_back(c);
    }
  }
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace

model::ExperimentBundle eval_bundle(const data::Dataset& dataset, const Splits& splits, const data::ConditionKey& key,
                                    const EvalOptions& options, int max_context, Rng& rng) {
  const data::Context& ctx = dataset.context(key.context_id);
  auto pool = context_pool(splits, key, options);
  std::shuffle(pool.begin(), pool.end(), rng);
  int k = options.context_size < 0 ? max_context : std::min(options.context_size, max_context);
  k = std::min(k, static_cast<int>(pool.size()));

  Eigen::Index available = ctx.observational.rows();
  for (int s = 0; s < k; ++s) available = std::min(available, dataset.condition(pool[static_cast<std::size_t>(s)]).samples.rows());
  const auto rows = train::shared_row_subset(available, options.cells, rng);

  model::ExperimentBundle b;
  b.y_obs = options.cells > 0 ? train::take_rows(ctx.observational, rows) : ctx.observational;
  for (int s = 0; s < k; ++s) {
    const data::Condition& c = dataset.condition(pool[static_cast<std::size_t>(s)]);
    b.context.push_back({c.treatment_code, options.cells > 0 ? train::take_rows(c.samples, rows) : c.samples});
  }
  b.query_treatment = dataset.condition(key).treatment_code;
  return b;
}

metrics::MetricReport run_eval(const std::vector<Predictor>& predictors, const data::Dataset& dataset,
                               const Splits& splits, const EvalOptions& options) {
  if (splits.test.empty()) throw InvalidArgument("run_eval: empty test set");
  for (const auto& p : predictors) {
    if (p.kind != PredictorKind::kModel) continue;
    if (p.config == nullptr || p.params == nullptr) throw InvalidArgument("run_eval: model predictor without parameters");
    if (p.config->max_genes != dataset.dims) {
      throw InvalidArgument("run_eval: model expects " + std::to_string(p.config->max_genes) + " genes, dataset has " +
                            std::to_string(dataset.dims));
    }
  }
  const std::string setting = options.setting.empty() ? to_string(options.mode) : options.setting;
  const std::size_t n_cond = splits.test.size();
  const std::size_t n_pred = predictors.size();
  std::vector<ConditionOutput> out(n_cond * n_pred);

  parallel_for(n_cond, options.workers, [&](std::size_t ci) {
    const data::ConditionKey key = splits.test[ci];
    const data::Context& ctx = dataset.context(key.context_id);
    const data::Condition& cond = dataset.condition(key);
    Rng rng(mix_seed(options.seed, key.context_id, key.treatment_id, SeedRole::kConfig));
    const int m = options.m > 0 ? options.m : static_cast<int>(cond.samples.rows() / 2);
    const HeldOutSplit held = split_interventional(cond.samples, m, rng);
    const auto gen_seed = mix_seed(options.seed, key.context_id, key.treatment_id, SeedRole::kSharedNoise);

    std::optional<metrics::DegResult> truth_deg;
    if (options.compute_deg) truth_deg = metrics::deg_labels(ctx.observational, held.eval, options.metrics);

    for (std::size_t pi = 0; pi < n_pred; ++pi) {
      const Predictor& p = predictors[pi];
      ConditionOutput& o = out[ci * n_pred + pi];
      metrics::MetricRow& row = o.row;
      row.method = p.name;
      row.setting = setting;
      row.seed = p.seed;
      row.context_id = key.context_id;
      row.treatment_id = key.treatment_id;
      switch (p.kind) {
        case PredictorKind::kIdentity:
          // The batch itself, unshuffled, so that its distance to Y_obs is exactly zero.
          o.prediction = ctx.observational;
          break;
        case PredictorKind::kObserved:
          o.prediction = held.reference;
          if (held.with_replacement) append_flag(row.flags, "with_replacement");
          break;
        case PredictorKind::kModel: {
          Rng bundle_rng(mix_seed(options.seed, key.context_id, key.treatment_id, SeedRole::kInterventional));
          const auto bundle = eval_bundle(dataset, splits, key, options, p.config->max_context, bundle_rng);
          row.flags = "K=" + std::to_string(bundle.context_size());
          o.prediction = train::generate(*p.config, *p.params, bundle, p.guidance, m, gen_seed);
          break;
        }
      }
      o.truth = held.eval;
      row.w2 = metrics::sinkhorn_divergence(held.eval, o.prediction, options.metrics);
      row.mmd = metrics::mmd_rbf(held.eval, o.prediction, options.metrics);
      row.rmse = metrics::rmse_means(held.eval, o.prediction);
      try {
        row.mag_ratio = metrics::magnitude_ratio(ctx.observational, held.eval, o.prediction, options.metrics);
      } catch (const DegenerateEffect&) {
        append_flag(row.flags, "degenerate_effect");
      }
      try {
        row.var_corr = metrics::variance_correlation(held.eval, o.prediction);
      } catch (const UndefinedMetric&) {
        append_flag(row.flags, "constant_variance");
      } catch (const InvalidArgument&) {
        append_flag(row.flags, "variance_undefined");
      }
      if (truth_deg) {
        try {
          const auto pred_deg = metrics::deg_labels(ctx.observational, o.prediction, options.metrics);
          row.auprc = metrics::auprc_curve(metrics::ranking_scores(pred_deg, options.metrics), truth_deg->labels).auprc;
        } catch (const UndefinedMetric&) {
          append_flag(row.flags, "no_deg");
        }
      }
    }
  });

  if (n_cond >= 2) {
    for (std::size_t pi = 0; pi < n_pred; ++pi) {
      std::vector<Vector> predicted, observed;
      for (std::size_t ci = 0; ci < n_cond; ++ci) {
        predicted.push_back(metrics::column_means(out[ci * n_pred + pi].prediction));
        observed.push_back(metrics::column_means(out[ci * n_pred + pi].truth));
      }
      const auto ranks = metrics::transposed_rank_per_condition(predicted, observed);
      for (std::size_t ci = 0; ci < n_cond; ++ci) out[ci * n_pred + pi].row.rank_t = ranks[ci];
    }
  }

  metrics::MetricReport report;
  for (std::size_t pi = 0; pi < n_pred; ++pi) {
    for (std::size_t ci = 0; ci < n_cond; ++ci) report.rows.push_back(out[ci * n_pred + pi].row);
  }
  return report;
}

metrics::MetricReport run_eval(const std::vector<Predictor>& predictors, const data::Dataset& dataset,
                               const std::vector<Splits>& splits, const EvalOptions& options) {
  if (splits.empty()) throw InvalidArgument("run_eval: no splits");
  metrics::MetricReport report;
  for (const auto& s : splits) {
    auto part = run_eval(predictors, dataset, s, options);
    report.rows.insert(report.rows.end(), part.rows.begin(), part.rows.end());
  }
  return report;
}

std::vector<Splits> make_holdout_splits(const data::Dataset& dataset, const std::vector<int>& holdout_contexts,
                                        const SplitSpec& spec) {
  const auto keys = dataset.condition_keys();
  std::vector<Splits> out;
  for (int c : holdout_contexts) {
    SplitSpec s = spec;
    s.holdout_context = c;
    out.push_back(make_splits(keys, s));
  }
  return out;
}

}  // namespace mappfn::harness
