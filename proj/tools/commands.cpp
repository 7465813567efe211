#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "json.hpp"
#include "mappfn/data/dataset_io.hpp"
#include "mappfn/diff/checkpoint.hpp"
#include "mappfn/grn/grn_dataset.hpp"
#include "mappfn/harness/evaluation.hpp"
#include "mappfn/harness/ingest.hpp"
#include "mappfn/harness/sweep.hpp"
#include "mappfn/scm/scm_dataset.hpp"
#include "mappfn/train/bundle_source.hpp"
#include "mappfn/train/trainer.hpp"

namespace mappfn::cli {

namespace fs = std::filesystem;

namespace {

fs::path require_out(const GlobalOptions& g) {
  if (g.out.empty()) throw InvalidArgument("--out is required");
  return fs::path(g.out);
}

fs::path out_dir(const GlobalOptions& g) {
  const fs::path dir = require_out(g);
  fs::create_directories(dir);
  return dir;
}

struct LoadedModel {
  model::ModelConfig config;
  model::Params params;
  int seed = 0;
};

LoadedModel load_model(const std::string& path) {
  diff::CheckpointData ck = diff::read_checkpoint(path);
  LoadedModel m;
  try {
    const auto header = nlohmann::json::parse(ck.header_json);
    m.config = model::ModelConfig::from_json(header.at("model").dump());
    m.seed = header.value("seed", 0);
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument("checkpoint header of " + path + ": " + e.what());
  }
  m.params = ck.ema ? std::move(*ck.ema) : std::move(ck.params);
  const auto expected = model::build_model(m.config, 0);
  if (!expected.same_layout(m.params)) throw InvalidArgument("checkpoint " + path + " does not match its config");
  return m;
}

std::vector<harness::Splits> eval_splits(const GlobalOptions& g, const EvalOptions& o, const data::Dataset& ds) {
  std::vector<int> holdout = o.holdout;
  if (holdout.empty()) {
    for (const auto& c : ds.contexts) holdout.push_back(c.context_id);
  }
  harness::SplitSpec spec;
  spec.mode = harness::parse_split_mode(o.mode);
  spec.seed = g.seed;
  return harness::make_holdout_splits(ds, holdout, spec);
}

harness::EvalOptions eval_options(const GlobalOptions& g, const EvalOptions& o) {
  harness::EvalOptions e;
  e.mode = harness::parse_split_mode(o.mode);
  e.m = o.m;
  e.context_size = o.context_size;
  e.context_from_test = o.context_from_test;
  e.cells = o.cells;
  e.seed = g.seed;
  e.workers = g.workers;
  e.compute_deg = o.deg;
  return e;
}

std::vector<harness::Predictor> predictors(const EvalOptions& o, const std::vector<LoadedModel>& models) {
  std::vector<harness::Predictor> out;
  train::GuidanceConfig guidance;
  guidance.omega = o.omega;
  for (const auto& m : models) out.push_back(harness::Predictor::model("mappfn", m.config, m.params, m.seed, guidance));
  if (o.baselines) {
    out.push_back(harness::Predictor::identity());
    out.push_back(harness::Predictor::observed());
  }
  if (out.empty()) throw InvalidArgument("nothing to evaluate: pass --checkpoint or enable --baselines");
  return out;
}

}  // namespace

int gen_scm(const GlobalOptions& g, const GenScmOptions& o) {
  scm::ScmDatasetConfig cfg = o.profile == "toy" ? scm::ScmDatasetConfig::toy() : scm::ScmDatasetConfig{};
  if (o.dags > 0) cfg.dags = o.dags;
  if (o.nodes > 0) cfg.nodes = o.nodes;
  if (o.samples > 0) cfg.samples = o.samples;
  cfg.edge_prob = o.edge_prob;
  cfg.paired = o.paired;
  cfg.seed = g.seed;
  const fs::path dir = out_dir(g);
  data::write_dataset(dir, scm::generate_scm_dataset(cfg, g.workers));
  std::printf("wrote %d SCM contexts to %s\n", cfg.dags, dir.string().c_str());
  return 0;
}

int gen_grn(const GlobalOptions& g, const GenGrnOptions& o) {
  grn::GrnDatasetConfig cfg;
  cfg.grns = o.grns;
  cfg.genes = o.genes;
  cfg.cells = o.cells;
  cfg.paired = o.paired;
  cfg.preprocess = o.preprocess;
  cfg.burn_in_steps = o.burn_in;
  cfg.seed = g.seed;
  const fs::path dir = out_dir(g);
  data::write_dataset(dir, grn::generate_grn_dataset(cfg, g.workers));
  std::printf("wrote %d GRN contexts to %s\n", cfg.grns, dir.string().c_str());
  return 0;
}

int train(const GlobalOptions& g, const TrainOptions& o) {
  const fs::path ckpt = require_out(g);
  if (ckpt.has_parent_path()) fs::create_directories(ckpt.parent_path());
  data::Dataset ds;
  if (!o.data.empty()) {
    ds = data::read_dataset(o.data);
  } else if (o.prior == "scm") {
    scm::ScmDatasetConfig cfg{o.dags, o.nodes, 0.5, o.samples, o.paired, g.seed, 0};
    ds = scm::generate_scm_dataset(cfg, g.workers);
  } else {
    grn::GrnDatasetConfig cfg;
    cfg.grns = o.grns;
    cfg.genes = o.genes;
    cfg.paired = o.paired;
    cfg.preprocess = true;
    cfg.seed = g.seed;
    ds = grn::generate_grn_dataset(cfg, g.workers);
  }
  std::vector<data::ConditionKey> pool;
  const std::set<int> excluded(o.exclude_contexts.begin(), o.exclude_contexts.end());
  for (const auto& key : ds.condition_keys()) {
    if (!excluded.contains(key.context_id)) pool.push_back(key);
  }
  if (pool.empty()) throw InvalidArgument("no training conditions left");

  const model::ModelConfig mcfg = model::ModelConfig::profile(o.profile, ds.dims, o.context_size);
  train::TrainConfig tcfg;
  tcfg.total_steps = o.steps;
  tcfg.batch_size = o.batch;
  tcfg.peak_lr = o.lr;
  tcfg.seed = g.seed;
  tcfg.workers = g.workers;
  train::BundleOptions bopt;
  bopt.context_size = o.context_size;
  bopt.variable_context = o.variable_context;
  bopt.cells = o.cells;
  const train::BundleSource source(ds, bopt, pool);
  const auto result = train::train(mcfg, tcfg, [&source](Rng& rng) { return source.draw(rng); });

  nlohmann::ordered_json header;
  header["model"] = nlohmann::json::parse(mcfg.to_json());
  header["seed"] = g.seed;
  header["prior"] = ds.prior;
  header["steps"] = o.steps;
  header["context_size"] = o.context_size;
  header["variable_context"] = o.variable_context;
  header["cells"] = o.cells;
  diff::write_checkpoint(ckpt, {header.dump(), result.params, result.ema});
  const fs::path loss = o.loss_csv.empty() ? fs::path(ckpt.string() + ".loss.csv") : fs::path(o.loss_csv);
  train::write_loss_trace(loss, result.trace);
  std::printf("trained %d steps, final loss %.6g; checkpoint %s\n", static_cast<int>(result.trace.size()),
              result.trace.empty() ? 0.0 : result.trace.back().loss, ckpt.string().c_str());
  return 0;
}

int eval(const GlobalOptions& g, const EvalOptions& o) {
  const fs::path dir = out_dir(g);
  const data::Dataset ds = data::read_dataset(o.data);
  std::vector<LoadedModel> models;
  for (const auto& c : o.checkpoints) models.push_back(load_model(c));
  const auto report = harness::run_eval(predictors(o, models), ds, eval_splits(g, o, ds), eval_options(g, o));
  report.write_csv(dir / "report.csv");
  report.write_json(dir / "summary.json");
  std::printf("evaluated %zu rows; report in %s\n", report.rows.size(), dir.string().c_str());
  return 0;
}

int sweep(const GlobalOptions& g, const EvalOptions& o) {
  const fs::path dir = out_dir(g);
  const data::Dataset ds = data::read_dataset(o.data);
  std::vector<LoadedModel> models;
  for (const auto& c : o.checkpoints) models.push_back(load_model(c));
  const auto preds = predictors(o, models);
  const auto splits = eval_splits(g, o, ds);
  const auto opts = eval_options(g, o);
  std::vector<harness::SweepPoint> points;
  if (o.axis == "context_size") {
    int k_max = 0;
    for (const auto& m : models) k_max = std::max(k_max, m.config.max_context);
    points = harness::sweep_context_size(preds, ds, splits, opts, k_max);
  } else {
    points = harness::sweep_guidance(preds, ds, splits, opts);
  }
  harness::write_sweep_csv(dir / "sweep.csv", points);
  std::printf("wrote %zu sweep points to %s\n", points.size(), (dir / "sweep.csv").string().c_str());
  return 0;
}

int ingest(const GlobalOptions& g, const IngestOptions& o) {
  const fs::path dir = out_dir(g);
  harness::IngestOptions opts;
  opts.control_label = o.control;
  const auto result = harness::ingest_and_preprocess(o.matrix, o.labels, opts);
  data::write_dataset(dir, result.dataset);
  if (result.dropped_cells > 0) std::fprintf(stderr, "warning: dropped %d all-zero cells\n", result.dropped_cells);
  std::printf("ingested %zu contexts into %s\n", result.dataset.contexts.size(), dir.string().c_str());
  return 0;
}

int report(const GlobalOptions& g, const ReportOptions& o) {
  metrics::MetricReport merged;
  for (const auto& path : o.inputs) {
    auto part = metrics::MetricReport::read_csv(path);
    merged.rows.insert(merged.rows.end(), part.rows.begin(), part.rows.end());
  }
  if (g.out.empty()) {
    std::printf("%s\n", merged.json().c_str());
    return 0;
  }
  const fs::path dir = out_dir(g);
  merged.write_json(dir / "summary.json");
  merged.write_csv(dir / "report.csv");
  return 0;
}

}  // namespace mappfn::cli
