#include <benchmark/benchmark.h>

#include "mappfn/grn/grn.hpp"
#include "mappfn/grn/sergio.hpp"
#include "mappfn/metrics/distances.hpp"
#include "mappfn/model/mappfn_model.hpp"
#include "mappfn/scm/scm_dataset.hpp"
#include "mappfn/train/bundle_source.hpp"
#include "mappfn/train/trainer.hpp"

namespace {

using namespace mappfn;

void BM_Sinkhorn(benchmark::State& state) {
  Rng rng(1);
  const auto n = state.range(0);
  const Matrix x = standard_normal(n, 6, rng);
  const Matrix y = standard_normal(n, 6, rng).array() + 0.5;
  for (auto _ : state) benchmark::DoNotOptimize(metrics::sinkhorn_divergence(x, y));
}
BENCHMARK(BM_Sinkhorn)->Arg(50)->Arg(250)->Unit(benchmark::kMillisecond);

void BM_Mmd(benchmark::State& state) {
  Rng rng(2);
  const auto n = state.range(0);
  const Matrix x = standard_normal(n, 6, rng);
  const Matrix y = standard_normal(n, 6, rng);
  for (auto _ : state) benchmark::DoNotOptimize(metrics::mmd_rbf(x, y));
}
BENCHMARK(BM_Mmd)->Arg(250)->Unit(benchmark::kMillisecond);

model::ExperimentBundle toy_bundle(int cells, int k) {
  scm::ScmDatasetConfig cfg = scm::ScmDatasetConfig::toy();
  cfg.dags = 1;
  const auto ds = scm::generate_scm_dataset(cfg);
  train::BundleOptions opt;
  opt.context_size = k;
  opt.cells = cells;
  const train::BundleSource source(ds, opt);
  Rng rng(3);
  return source.draw(rng);
}

void BM_ToyForward(benchmark::State& state) {
  const auto bundle = toy_bundle(static_cast<int>(state.range(0)), 2);
  const auto cfg = model::ModelConfig::toy(6, 2);
  const auto params = model::build_model(cfg, 0);
  Rng rng(4);
  const Matrix y = standard_normal(bundle.target.rows(), 6, rng);
  for (auto _ : state) benchmark::DoNotOptimize(model::predict_velocity(cfg, params, y, 0.5, bundle, false));
}
BENCHMARK(BM_ToyForward)->Arg(32)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_ToyTrainStep(benchmark::State& state) {
  scm::ScmDatasetConfig dcfg = scm::ScmDatasetConfig::toy();
  dcfg.dags = 8;
  const auto ds = scm::generate_scm_dataset(dcfg);
  train::BundleOptions opt;
  opt.cells = static_cast<int>(state.range(0));
  const train::BundleSource source(ds, opt);
  const auto cfg = model::ModelConfig::toy(6, 2);
  train::TrainConfig tcfg;
  tcfg.total_steps = 1;
  for (auto _ : state) {
    auto r = train::train(cfg, tcfg, [&source](Rng& rng) { return source.draw(rng); });
    benchmark::DoNotOptimize(r.trace);
  }
}
BENCHMARK(BM_ToyTrainStep)->Arg(32)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_LangevinCells(benchmark::State& state) {
  Rng rng(5);
  const auto structure = grn::GrnConfig::sample(20, rng);
  const auto net = grn::build_network(structure, rng);
  grn::SergioConfig sim;
  sim.burn_in_steps = 2000;
  for (auto _ : state) benchmark::DoNotOptimize(grn::simulate_expression(net, sim, 50, 7));
}
BENCHMARK(BM_LangevinCells)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
