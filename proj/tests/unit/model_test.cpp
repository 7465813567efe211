#include <gtest/gtest.h>

#include "mappfn/diff/gradcheck.hpp"
#include "mappfn/model/mappfn_model.hpp"

namespace mappfn::model {
namespace {

std::size_t closed_form_count(const ModelConfig& c) {
  const std::size_t e = c.embed_dim;
  const std::size_t a = c.attention_width();
  const std::size_t f = c.ff_dim;
  const std::size_t d = c.max_genes;
  const std::size_t linear_ee = e * e + e;
  const std::size_t block = (e * 6 * e + 6 * e) + 2 * e + 3 * (e * a + a) + (a * e + e) + 2 * e + (e * f + f) +
                            (f * e + e);
  const std::size_t embeddings = c.register_tokens * e + c.max_context * e + 2 * e + 2 * e + e;
  return 2 * linear_ee + 3 * (d * e + e) + embeddings + 3 * c.layers * block + (e * 2 * e + 2 * e) + 2 * e +
         (e * d + d);
}

// Randomizes every parameter so that zero-initialized projections carry signal.
template <typename T>
diff::ParameterSet<T> perturbed(const Params& p, std::uint64_t seed, double scale) {
  auto out = p.cast<T>();
  Rng rng(seed);
  for (std::size_t i = 0; i < out.size(); ++i) {
    auto& v = out.value(i);
    v += (standard_normal(v.rows(), v.cols(), rng) * scale).template cast<T>();
  }
  return out;
}

ExperimentBundle make_bundle(int d, int k, int cells, std::uint64_t seed) {
  Rng rng(seed);
  ExperimentBundle b;
  b.y_obs = standard_normal(cells, d, rng);
  for (int i = 0; i < k; ++i) {
    ContextExperiment ex;
    ex.treatment = Vector::Zero(d);
    ex.treatment(i) = 1.0;
    ex.samples = standard_normal(cells, d, rng);
    b.context.push_back(ex);
  }
  b.query_treatment = Vector::Zero(d);
  b.query_treatment(d - 1) = 1.0;
  b.target = standard_normal(cells, d, rng);
  return b;
}

Matrix reversed_rows(const Matrix& m) { return m.colwise().reverse(); }

class ToyModel : public ::testing::Test {
 protected:
  ModelConfig cfg = ModelConfig::toy(6, 2);
  Params params = perturbed<float>(build_model(cfg, 3), 4, 0.05);
  ExperimentBundle bundle = make_bundle(6, 2, 7, 5);
  Matrix y_tau = [] {
    Rng rng(6);
    return standard_normal(5, 6, rng);
  }();
};

TEST(BuildModel, ToyCountMatchesClosedForm) {
  const auto cfg = ModelConfig::toy(6, 2);
  EXPECT_EQ(closed_form_count(cfg), 369798u);
  EXPECT_EQ(build_model(cfg, 0).parameter_count(), 369798u);
}

TEST(BuildModel, CountMatchesClosedFormAcrossShapes) {
  for (auto [genes, k] : std::vector<std::pair<int, int>>{{3, 0}, {10, 4}, {20, 1}}) {
    const auto cfg = ModelConfig::toy(genes, k);
    EXPECT_EQ(build_model(cfg, 0).parameter_count(), closed_form_count(cfg));
  }
}

TEST(BuildModel, PaperProfileNearTwentyFiveMillion) {
  const auto cfg = ModelConfig::paper(20, 10);
  EXPECT_EQ(cfg.layers, 8);
  EXPECT_EQ(cfg.embed_dim, 256);
  EXPECT_EQ(cfg.ff_dim, 512);
  EXPECT_EQ(cfg.heads, 4);
  EXPECT_EQ(cfg.head_dim, 64);
  EXPECT_EQ(cfg.register_tokens, 8);
  EXPECT_DOUBLE_EQ(cfg.condition_drop_prob, 0.2);
  const double count = static_cast<double>(closed_form_count(cfg));
  EXPECT_GT(count, 25e6 * 0.8);
  EXPECT_LT(count, 25e6 * 1.2);
}

TEST(BuildModel, SameSeedBitIdentical) {
  const auto cfg = ModelConfig::toy(6, 2);
  const auto a = build_model(cfg, 9);
  const auto b = build_model(cfg, 9);
  const auto c = build_model(cfg, 10);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a.name(i), b.name(i));
    EXPECT_TRUE(a.value(i) == b.value(i)) << a.name(i);
    differs = differs || !(a.value(i) == c.value(i));
  }
  EXPECT_TRUE(differs);
}

TEST(BuildModel, StartsWithZeroVelocity) {
  const auto cfg = ModelConfig::toy(6, 2);
  const auto v = predict_velocity(cfg, build_model(cfg, 1), Matrix::Ones(3, 6), 0.4, make_bundle(6, 2, 4, 1), false);
  EXPECT_EQ(v.cwiseAbs().maxCoeff(), 0.0);
}

TEST(ModelConfig, JsonRoundTripAndValidation) {
  auto cfg = ModelConfig::paper(12, 3);
  EXPECT_EQ(ModelConfig::from_json(cfg.to_json()), cfg);
  EXPECT_EQ(ModelConfig::profile("toy", 6, 2), ModelConfig::toy(6, 2));
  EXPECT_THROW(ModelConfig::profile("huge", 6, 2), InvalidArgument);
  cfg.embed_dim = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = ModelConfig::toy(6, 2);
  cfg.condition_drop_prob = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
}

TEST_F(ToyModel, OutputShapeIncludingZeroShot) {
  EXPECT_EQ(predict_velocity(cfg, params, y_tau, 0.3, bundle, false).rows(), 5);
  ExperimentBundle zero_shot = bundle;
  zero_shot.context.clear();
  const Matrix v = predict_velocity(cfg, params, y_tau, 0.3, zero_shot, false);
  EXPECT_EQ(v.rows(), 5);
  EXPECT_EQ(v.cols(), 6);
  EXPECT_TRUE(v.allFinite());
  EXPECT_GT(v.cwiseAbs().maxCoeff(), 0.0);
}

TEST_F(ToyModel, QueryRowsAreEquivariant) {
  const Matrix v = predict_velocity(cfg, params, y_tau, 0.6, bundle, false);
  const Matrix v_rev = predict_velocity(cfg, params, reversed_rows(y_tau), 0.6, bundle, false);
  EXPECT_TRUE(v_rev == reversed_rows(v));
}

TEST_F(ToyModel, ConditioningCellOrderIsIrrelevant) {
  const Matrix v = predict_velocity(cfg, params, y_tau, 0.6, bundle, false);
  ExperimentBundle shuffled = bundle;
  shuffled.y_obs = reversed_rows(bundle.y_obs);
  shuffled.context[1].samples = reversed_rows(bundle.context[1].samples);
  EXPECT_TRUE(predict_velocity(cfg, params, y_tau, 0.6, shuffled, false) == v);
}

TEST_F(ToyModel, ConditioningChangesOutput) {
  const Matrix v = predict_velocity(cfg, params, y_tau, 0.6, bundle, false);
  ExperimentBundle other = make_bundle(6, 2, 7, 55);
  EXPECT_FALSE(predict_velocity(cfg, params, y_tau, 0.6, other, false) == v);
  EXPECT_FALSE(predict_velocity(cfg, params, y_tau, 0.2, bundle, false) == v);
}

TEST_F(ToyModel, DroppedConditionIgnoresBundle) {
  const Matrix v = predict_velocity(cfg, params, y_tau, 0.6, bundle, true);
  ExperimentBundle other = make_bundle(6, 1, 3, 56);
  EXPECT_TRUE(predict_velocity(cfg, params, y_tau, 0.6, other, true) == v);
  EXPECT_TRUE(predict_velocity(cfg, params, y_tau, 0.6, ExperimentBundle{}, true) == v);
  EXPECT_FALSE(predict_velocity(cfg, params, y_tau, 0.6, bundle, false) == v);
}

TEST_F(ToyModel, ForwardIsPure) {
  EXPECT_TRUE(predict_velocity(cfg, params, y_tau, 0.5, bundle, false) ==
              predict_velocity(cfg, params, y_tau, 0.5, bundle, false));
}

TEST_F(ToyModel, ShapeErrorsRejected) {
  ExperimentBundle too_many = make_bundle(6, 3, 4, 7);
  EXPECT_THROW(predict_velocity(cfg, params, y_tau, 0.5, too_many, false), InvalidArgument);
  EXPECT_THROW(predict_velocity(cfg, params, Matrix::Ones(2, 5), 0.5, bundle, false), InvalidArgument);
  ExperimentBundle narrow = make_bundle(5, 1, 4, 8);
  EXPECT_THROW(predict_velocity(cfg, params, y_tau, 0.5, narrow, false), InvalidArgument);
}

TEST_F(ToyModel, CfmLossMatchesDirectComputation) {
  Rng rng(12);
  const Matrix y0 = standard_normal(bundle.target.rows(), 6, rng);
  const double tau = 0.35;
  diff::Tape<float> tape;
  const auto bound = diff::bind(tape, params, false);
  const double loss = tape.value(cfm_loss<float>(tape, cfg, params, bound, bundle, tau, y0, false))(0, 0);
  const Matrix y_tau_q = (1.0 - tau) * y0 + tau * bundle.target;
  const Matrix v = predict_velocity(cfg, params, y_tau_q, tau, bundle, false);
  const double expected = (v - (bundle.target - y0)).array().square().mean();
  EXPECT_NEAR(loss, expected, 1e-5 * std::max(1.0, expected));
}

TEST(CfmLoss, ZeroVelocityModelScoresTargetVelocityPower) {
  const auto cfg = ModelConfig::toy(6, 2);
  const auto params = build_model(cfg, 2);
  auto b = make_bundle(6, 2, 4, 3);
  const Matrix y0 = Matrix::Zero(4, 6);
  b.target = Matrix::Constant(4, 6, 2.0);
  diff::Tape<float> tape;
  const auto bound = diff::bind(tape, params, false);
  EXPECT_FLOAT_EQ(tape.value(cfm_loss<float>(tape, cfg, params, bound, b, 0.5, y0, false))(0, 0), 4.0f);
}

TEST(ModelGradient, ComposedLossMatchesFiniteDifferences) {
  auto cfg = ModelConfig::toy(4, 2);
  cfg.embed_dim = 32;
  cfg.ff_dim = 64;
  cfg.heads = 2;
  cfg.head_dim = 16;
  const auto params = perturbed<double>(build_model(cfg, 21), 22, 0.1);
  const auto bundle = make_bundle(4, 2, 5, 23);
  Rng rng(24);
  const Matrix y0 = standard_normal(5, 4, rng);

  std::vector<diff::Mat<double>> inputs;
  for (std::size_t i = 0; i < params.size(); ++i) inputs.push_back(params.value(i));
  const diff::ScalarFunction loss = [&](diff::Tape<double>& tape, std::span<const diff::Var> vars) {
    const std::vector<diff::Var> bound(vars.begin(), vars.end());
    return cfm_loss<double>(tape, cfg, params, bound, bundle, 0.4, y0, false);
  };
  diff::GradCheckOptions opts;
  opts.max_entries = 200;
  opts.seed = 25;
  const auto r = diff::check_gradients(loss, inputs, opts);
  EXPECT_EQ(r.checked, 200u);
  EXPECT_LT(r.max_error, 1e-3) << r.worst;
}

}  // namespace
}  // namespace mappfn::model
