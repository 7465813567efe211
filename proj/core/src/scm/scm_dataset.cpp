#include "mappfn/scm/scm_dataset.hpp"

#include <string>

namespace mappfn::scm {

ScmDatasetConfig ScmDatasetConfig::toy() {
  ScmDatasetConfig cfg;
  cfg.dags = 200;
  cfg.nodes = 6;
  cfg.samples = 100;
  return cfg;
}

ScmDraw generate_scm_context(const ScmDatasetConfig& config, int index) {
  const int ctx = config.first_context + index;
  Rng graph_rng(mix_seed(config.seed, ctx, 0, SeedRole::kGraph));
  ScmDraw draw{sample_dag(config.nodes, config.edge_prob, graph_rng), {}};
  draw.context.context_id = ctx;
  draw.context.name = "scm" + std::to_string(ctx);

  const std::uint64_t shared_seed = mix_seed(config.seed, ctx, data::kObservationalTreatment, SeedRole::kSharedNoise);
  const std::uint64_t obs_seed =
      config.paired ? shared_seed : mix_seed(config.seed, ctx, data::kObservationalTreatment, SeedRole::kObservational);
  const Matrix noise = draw_noise(config.samples, config.nodes, obs_seed);
  draw.context.observational = sample_observational(draw.dag, noise, obs_seed).values;
  draw.context.observational_seed = obs_seed;

  for (int t = 0; t < config.nodes; ++t) {
    Rng value_rng(mix_seed(config.seed, ctx, t, SeedRole::kInterventionValue));
    const Intervention iv = sample_intervention(t, value_rng);
    const std::uint64_t seed = config.paired ? obs_seed : mix_seed(config.seed, ctx, t, SeedRole::kInterventional);
    SampleBatch batch = sample_interventional(draw.dag, iv, config.samples, seed, config.paired ? &noise : nullptr);
    draw.context.conditions.push_back({t, encode_treatment(iv, config.nodes), std::move(batch.values), seed});
  }
  return draw;
}

data::Dataset generate_scm_dataset(const ScmDatasetConfig& config, int workers) {
  if (config.dags < 1) throw InvalidArgument("generate_scm_dataset: need at least one DAG");
  if (config.samples < 2) throw InvalidArgument("generate_scm_dataset: need at least two samples per batch");
  data::Dataset dataset;
  dataset.prior = "scm";
  dataset.dims = config.nodes;
  dataset.paired = config.paired;
  dataset.metadata = {{"dags", std::to_string(config.dags)},
                      {"nodes", std::to_string(config.nodes)},
                      {"edge_prob", std::to_string(config.edge_prob)},
                      {"samples", std::to_string(config.samples)},
                      {"seed", std::to_string(config.seed)}};
  dataset.contexts.resize(static_cast<std::size_t>(config.dags));
  parallel_for(dataset.contexts.size(), workers, [&](std::size_t i) {
    dataset.contexts[i] = generate_scm_context(config, static_cast<int>(i)).context;
  });
  return dataset;
}

}  // namespace mappfn::scm
