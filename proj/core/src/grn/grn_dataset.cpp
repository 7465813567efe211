#include "mappfn/grn/grn_dataset.hpp"

#include <string>

#include "mappfn/data/preprocess.hpp"

namespace mappfn::grn {

GrnDraw generate_grn_context(const GrnDatasetConfig& config, int index) {
  const int ctx = config.first_context + index;
  GrnDraw draw;
  Rng config_rng(mix_seed(config.seed, ctx, 0, SeedRole::kConfig));
  draw.structure = GrnConfig::sample(config.genes, config_rng);
  draw.simulation = SergioConfig::sample(config_rng);
  draw.simulation.burn_in_steps = config.burn_in_steps;
  Rng graph_rng(mix_seed(config.seed, ctx, 0, SeedRole::kGraph));
  draw.network = build_network(draw.structure, graph_rng);

  draw.context.context_id = ctx;
  draw.context.name = "grn" + std::to_string(ctx);

  const std::uint64_t shared = mix_seed(config.seed, ctx, data::kObservationalTreatment, SeedRole::kSharedNoise);
  auto simulate = [&](const Grn& network, int treatment) {
    const std::uint64_t sim_seed =
        config.paired ? shared : mix_seed(config.seed, ctx, treatment, SeedRole::kObservational);
    const std::uint64_t noise_seed =
        config.paired ? splitmix64(shared) : mix_seed(config.seed, ctx, treatment, SeedRole::kTechnicalNoise);
    Matrix counts =
        apply_technical_noise(simulate_expression(network, draw.simulation, config.cells, sim_seed), draw.simulation,
                              noise_seed);
    if (config.preprocess) counts = data::normalize_log1p(counts).values;
    return std::pair{std::move(counts), sim_seed};
  };

  auto [control, control_seed] = simulate(draw.network, data::kObservationalTreatment);
  draw.context.observational = std::move(control);
  draw.context.observational_seed = control_seed;
  for (int gene = 0; gene < config.genes; ++gene) {
    auto [values, seed] = simulate(knockout(draw.network, gene), gene);
    // Knockouts carry no efficiency scalar: the hot value is 1.
    Vector code = Vector::Zero(config.genes);
    code(gene) = 1.0;
    draw.context.conditions.push_back({gene, std::move(code), std::move(values), seed});
  }
  return draw;
}

data::Dataset generate_grn_dataset(const GrnDatasetConfig& config, int workers) {
  if (config.grns < 1) throw InvalidArgument("generate_grn_dataset: need at least one network");
  if (config.genes < 2) throw InvalidArgument("generate_grn_dataset: need at least two genes");
  data::Dataset dataset;
  dataset.prior = "grn";
  dataset.dims = config.genes;
  dataset.paired = config.paired;
  dataset.metadata = {{"grns", std::to_string(config.grns)},
                      {"genes", std::to_string(config.genes)},
                      {"cells", std::to_string(config.cells)},
                      {"preprocess", config.preprocess ? "true" : "false"},
                      {"seed", std::to_string(config.seed)}};
  dataset.contexts.resize(static_cast<std::size_t>(config.grns));
  parallel_for(dataset.contexts.size(), workers, [&](std::size_t i) {
    dataset.contexts[i] = generate_grn_context(config, static_cast<int>(i)).context;
  });
  return dataset;
}

}  // namespace mappfn::grn
