#include <gtest/gtest.h>

#include <cmath>

#include "mappfn/scm/scm_dataset.hpp"
#include "mappfn/scm/scm_prior.hpp"

namespace mappfn::scm {
namespace {

Matrix chain(double w) {
  Matrix m = Matrix::Zero(2, 2);
  m(1, 0) = w;
  return m;
}

TEST(SampleDag, MeanEdgeCountMatchesEdgeProbability) {
  Rng rng(11);
  double total = 0.0;
  for (int i = 0; i < 1000; ++i) total += sample_dag(20, 0.5, rng).edge_count();
  // Binomial(190, 0.5): sd of the mean over 1000 draws is about 0.22.
  EXPECT_NEAR(total / 1000.0, 95.0, 1.0);
}

TEST(SampleDag, SingleNodeHasNoEdges) {
  Rng rng(1);
  const auto dag = sample_dag(1, 0.9, rng);
  EXPECT_EQ(dag.nodes(), 1);
  EXPECT_EQ(dag.edge_count(), 0);
}

TEST(SampleDag, FullProbabilityGivesCompleteAcyclicGraph) {
  Rng rng(2);
  const auto dag = sample_dag(3, 1.0, rng);
  EXPECT_EQ(dag.edge_count(), 3);
  EXPECT_NO_THROW(topological_order(dag.weights));
}

TEST(SampleDag, ZeroNodesRejected) {
  Rng rng(3);
  EXPECT_THROW(sample_dag(0, 0.5, rng), InvalidArgument);
}

TEST(SampleDag, StructuralInvariantsHold) {
  Rng rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    const auto raw = sample_dag(8, 0.6, rng, false);
    const auto order = topological_order(raw.weights);
    EXPECT_EQ(order.size(), 8u);
    for (int k = 0; k < 8; ++k) {
      EXPECT_EQ(raw.weights(k, k), 0.0);
      for (int j = 0; j < 8; ++j) {
        const double w = std::abs(raw.weights(k, j));
        if (w != 0.0) {
          EXPECT_GE(w, 0.5);
          EXPECT_LE(w, 2.0);
        }
      }
    }
    const Matrix norm = normalize_weights(raw.weights);
    EXPECT_TRUE((norm.array().sign() == raw.weights.array().sign()).all());
  }
}

TEST(NormalizeWeights, ZeroMatrixStaysZero) {
  EXPECT_TRUE(normalize_weights(Matrix::Zero(4, 4)).isZero(0.0));
}

TEST(NormalizeWeights, TwoNodeChainByHand) {
  const Matrix t = transfer_matrix(chain(2.0));
  EXPECT_DOUBLE_EQ(t(1, 0), 2.0);
  EXPECT_DOUBLE_EQ(t(1, 1), 1.0);
  const Matrix out = normalize_weights(chain(2.0));
  EXPECT_NEAR(out(1, 0), 2.0 / std::sqrt(5.0), 1e-12);
  EXPECT_EQ(out(0, 1), 0.0);
}

TEST(NormalizeWeights, NormalizedNodesHaveUnitVarianceUnderUnitNoise) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto dag = sample_dag(10, 0.5, rng);
    const Matrix t = transfer_matrix(dag.weights);
    const Vector diag = (t * t.transpose()).diagonal();
    // Rescaling the equations keeps variance growth along chains bounded.
    EXPECT_TRUE(diag.allFinite());
  }
}

TEST(SampleObservational, PureNoiseIsCenteredWithUnitVariance) {
  WeightedDag dag{Matrix::Zero(3, 3), {0, 1, 2}};
  const auto batch = sample_observational(dag, 10000, 42);
  for (int j = 0; j < 3; ++j) {
    const double mean = batch.values.col(j).mean();
    EXPECT_LT(std::abs(mean), 5.0 / std::sqrt(10000.0));
    const double var = (batch.values.col(j).array() - mean).square().sum() / 9999.0;
    EXPECT_NEAR(var, 1.0, 1e-12);
  }
}

TEST(SampleObservational, ChainCovarianceMatchesClosedForm) {
  WeightedDag dag{chain(2.0), {0, 1}};
  const auto batch = sample_observational(dag, 20000, 7, SampleOptions{false});
  const double mean = batch.values.col(1).mean();
  const double var = (batch.values.col(1).array() - mean).square().sum() / 19999.0;
  // Var(z2) = 4 + 1; sampling sd of the variance is about 5 * sqrt(2/n) = 0.05.
  EXPECT_NEAR(var, 5.0, 0.25);
}

TEST(SampleObservational, Deterministic) {
  Rng rng(8);
  const auto dag = sample_dag(6, 0.5, rng);
  const auto a = sample_observational(dag, 50, 99);
  const auto b = sample_observational(dag, 50, 99);
  EXPECT_TRUE(a.values == b.values);
}

TEST(Intervention, RootNodeLeavesWeightsUnchanged) {
  WeightedDag dag{chain(1.5), {0, 1}};
  const auto mutilated = apply_intervention(dag, {0, 0.8});
  EXPECT_TRUE(mutilated.weights == dag.weights);
  const auto batch = sample_interventional(dag, {0, 0.8}, 100, 3, nullptr, SampleOptions{false});
  EXPECT_TRUE((batch.values.col(0).array() == 0.8).all());
}

TEST(Intervention, ZeroesExactlyTheTargetRow) {
  Matrix w = Matrix::Zero(5, 5);
  w(4, 0) = 1.0;
  w(4, 1) = -0.7;
  w(4, 2) = 0.6;
  w(3, 0) = 0.9;
  w(2, 1) = 1.1;
  const WeightedDag dag{w, {0, 1, 2, 3, 4}};
  const auto mutilated = apply_intervention(dag, {4, 1.0});
  EXPECT_TRUE(mutilated.weights.row(4).isZero(0.0));
  for (int k = 0; k < 4; ++k) EXPECT_TRUE(mutilated.weights.row(k) == w.row(k));
}

TEST(Intervention, TargetOutOfRangeRejected) {
  WeightedDag dag{chain(1.0), {0, 1}};
  EXPECT_THROW(apply_intervention(dag, {2, 1.0}), InvalidArgument);
  EXPECT_THROW(apply_intervention(dag, {-1, 1.0}), InvalidArgument);
}

TEST(Intervention, ValuesStayInPriorRange) {
  Rng rng(9);
  double lo = 10.0;
  double hi = -10.0;
  for (int i = 0; i < 10000; ++i) {
    const double c = sample_intervention(0, rng).value;
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  EXPECT_GE(lo, 0.5);
  EXPECT_LE(hi, 1.5);
}

TEST(SampleInterventional, SinkInterventionChangesOnlyTargetColumnWithSharedNoise) {
  Matrix w = Matrix::Zero(3, 3);
  w(1, 0) = 1.2;
  w(2, 1) = -0.9;
  const WeightedDag dag{w, {0, 1, 2}};
  const Matrix noise = draw_noise(200, 3, 5);
  const auto obs = sample_observational(dag, noise, 5, SampleOptions{false});
  const auto iv = sample_interventional(dag, {2, 0.7}, 200, 0, &noise, SampleOptions{false});
  EXPECT_TRUE(obs.values.col(0) == iv.values.col(0));
  EXPECT_TRUE(obs.values.col(1) == iv.values.col(1));
  EXPECT_FALSE(obs.values.col(2) == iv.values.col(2));
}

TEST(SampleInterventional, UnpairedSeedsDiffer) {
  Rng rng(10);
  const auto dag = sample_dag(4, 0.5, rng);
  const auto a = sample_interventional(dag, {1, 1.0}, 30, 1);
  const auto b = sample_interventional(dag, {1, 1.0}, 30, 2);
  EXPECT_FALSE(a.values == b.values);
}

TEST(SampleInterventional, PairedNonDescendantColumnsAgree) {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    const auto dag = sample_dag(7, 0.4, rng);
    const Matrix noise = draw_noise(64, 7, 100 + trial);
    const int s = trial % 7;
    const int t = (trial * 3 + 1) % 7;
    const auto a = sample_interventional(dag, {s, 0.9}, 64, 0, &noise);
    const auto b = sample_interventional(dag, {t, 1.3}, 64, 0, &noise);
    const auto ds = descendants(dag, s);
    const auto dt = descendants(dag, t);
    for (int k = 0; k < 7; ++k) {
      if (!ds[static_cast<std::size_t>(k)] && !dt[static_cast<std::size_t>(k)]) {
        EXPECT_TRUE(a.values.col(k) == b.values.col(k)) << "node " << k;
      }
    }
  }
}

TEST(SampleInterventional, StandardizedBatchKeepsClampedColumn) {
  Rng rng(13);
  std::uniform_real_distribution<double> value(0.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto dag = sample_dag(6, 0.5, rng);
    const Intervention iv{trial % 6, value(rng)};
    const auto batch = sample_interventional(dag, iv, 100, static_cast<std::uint64_t>(trial));
    for (int k = 0; k < 6; ++k) {
      const auto col = batch.values.col(k);
      if (k == iv.target) {
        EXPECT_EQ(col.minCoeff(), iv.value);
        EXPECT_EQ(col.maxCoeff(), iv.value);
      } else {
        const double mean = col.mean();
        EXPECT_NEAR((col.array() - mean).square().sum() / 99.0, 1.0, 1e-6);
      }
    }
  }
}

TEST(SampleInterventional, PairedNoiseShapeChecked) {
  WeightedDag dag{chain(1.0), {0, 1}};
  const Matrix noise = draw_noise(10, 3, 1);
  EXPECT_THROW(sample_interventional(dag, {0, 1.0}, 10, 0, &noise), InvalidArgument);
}

TEST(TreatmentCode, OneHotHoldsValue) {
  const Vector code = encode_treatment({2, 0.7}, 4);
  EXPECT_EQ(code, (Vector(4) << 0.0, 0.0, 0.7, 0.0).finished());
  EXPECT_EQ(encode_treatment({0, 1.0}, 1), Vector::Ones(1));
}

TEST(TreatmentCode, RoundTrip) {
  for (int d = 1; d <= 64; ++d) {
    for (int t = 0; t < d; t += std::max(1, d / 7)) {
      const auto back = decode_treatment(encode_treatment({t, 0.5 + 0.01 * t}, d));
      EXPECT_EQ(back.target, t);
      EXPECT_DOUBLE_EQ(back.value, 0.5 + 0.01 * t);
    }
  }
}

TEST(ScmDataset, IndependentOfWorkerCount) {
  ScmDatasetConfig cfg = ScmDatasetConfig::toy();
  cfg.dags = 6;
  const auto a = generate_scm_dataset(cfg, 1);
  const auto b = generate_scm_dataset(cfg, 3);
  ASSERT_EQ(a.contexts.size(), b.contexts.size());
  for (std::size_t c = 0; c < a.contexts.size(); ++c) {
    EXPECT_TRUE(a.contexts[c].observational == b.contexts[c].observational);
    ASSERT_EQ(a.contexts[c].conditions.size(), 6u);
    for (std::size_t t = 0; t < 6; ++t) {
      EXPECT_TRUE(a.contexts[c].conditions[t].samples == b.contexts[c].conditions[t].samples);
    }
  }
}

TEST(ScmDataset, PairedSinkConditionDiffersOnlyInTarget) {
  ScmDatasetConfig cfg = ScmDatasetConfig::toy();
  cfg.dags = 1;
  cfg.paired = true;
  const auto draw = generate_scm_context(cfg, 0);
  const int sink = draw.dag.node_permutation.back();
  const auto& cond = *draw.context.find(sink);
  for (int j = 0; j < 6; ++j) {
    if (j == sink) continue;
    EXPECT_TRUE(cond.samples.col(j) == draw.context.observational.col(j)) << "column " << j;
  }
}

}  // namespace
}  // namespace mappfn::scm
