#pragma once

// Gradient-check cases for every differentiable primitive and for the composed
// flow-matching loss, shared by the unit and acceptance tests.

#include <string>
#include <vector>

#include "mappfn/diff/attention.hpp"
#include "mappfn/diff/gradcheck.hpp"
#include "mappfn/diff/ops.hpp"
#include "mappfn/model/mappfn_model.hpp"

namespace mappfn::gradient_cases {

using diff::Mat;
using diff::ScalarFunction;
using diff::Tape;
using diff::Var;
using M = Mat<double>;

inline constexpr double kPrimitiveTolerance = 1e-4;
inline constexpr double kComposedTolerance = 1e-3;

struct Case {
  std::string name;
  ScalarFunction f;
  std::vector<M> inputs;
};

inline M random(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed, double scale = 1.0) {
  Rng rng(seed);
  return standard_normal(rows, cols, rng) * scale;
}

// Contracts a matrix-valued node with fixed random weights so every output
// entry receives a distinct upstream gradient.
inline Var contract(Tape<double>& tape, Var v, std::uint64_t seed = 99) {
  const M& value = tape.value(v);
  const Var w = tape.constant(random(value.rows(), value.cols(), seed));
  return diff::sum(tape, diff::mul(tape, v, w));
}

inline Case joint_attention_case() {
  // 8 tokens of width 16 split over two streams, trained projections included.
  const int width = 16;
  const int heads = 2;
  const int head_dim = 4;
  const int attn = heads * head_dim;
  std::vector<M> inputs{random(5, width, 40), random(3, width, 41), random(5, width, 42, 0.5)};
  for (int s = 0; s < 2; ++s) {
    for (auto [r, c] : std::vector<std::pair<int, int>>{{width, attn}, {1, attn}, {width, attn}, {1, attn},
                                                        {width, attn}, {1, attn}, {attn, width}, {1, width}}) {
      inputs.push_back(random(r, c, 50 + inputs.size(), 0.4));
    }
  }
  const auto f = [=](Tape<double>& t, std::span<const Var> v) {
    std::vector<diff::AttentionProjections> params;
    for (int s = 0; s < 2; ++s) {
      const auto* p = v.data() + 3 + 8 * s;
      params.push_back({p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7]});
    }
    const std::vector<Var> streams{v[0], v[1]};
    const auto out = diff::joint_attention(t, std::span<const Var>(streams),
                                           std::span<const diff::AttentionProjections>(params), heads, head_dim);
    return diff::mse(t, out[0], v[2]);
  };
  return {"joint_attention", f, inputs};
}

inline std::vector<Case> primitive_cases() {
  using namespace diff;
  std::vector<Case> c;
  auto unary = [&](std::string name, auto op, std::vector<M> in) {
    c.push_back({std::move(name), [op](Tape<double>& t, std::span<const Var> v) { return contract(t, op(t, v)); },
                 std::move(in)});
  };
  unary("matmul", [](Tape<double>& t, std::span<const Var> v) { return matmul(t, v[0], v[1]); },
        {random(3, 4, 1), random(4, 5, 2)});
  unary("linear", [](Tape<double>& t, std::span<const Var> v) { return linear(t, v[0], v[1], v[2]); },
        {random(3, 4, 3), random(4, 2, 4), random(1, 2, 5)});
  unary("linear_no_bias", [](Tape<double>& t, std::span<const Var> v) { return linear(t, v[0], v[1]); },
        {random(3, 4, 6), random(4, 2, 7)});
  const std::vector<M> pair{random(3, 4, 8), random(3, 4, 9)};
  unary("add", [](Tape<double>& t, std::span<const Var> v) { return add(t, v[0], v[1]); }, pair);
  unary("sub", [](Tape<double>& t, std::span<const Var> v) { return sub(t, v[0], v[1]); }, pair);
  unary("mul", [](Tape<double>& t, std::span<const Var> v) { return mul(t, v[0], v[1]); }, pair);
  unary("scale", [](Tape<double>& t, std::span<const Var> v) { return scale(t, v[0], -2.5); }, pair);
  unary("add_row", [](Tape<double>& t, std::span<const Var> v) { return add_row(t, v[0], v[1]); },
        {random(3, 4, 10), random(1, 4, 11)});
  unary("gelu", [](Tape<double>& t, std::span<const Var> v) { return gelu(t, v[0]); }, {random(4, 5, 12, 2.0)});
  unary("silu", [](Tape<double>& t, std::span<const Var> v) { return silu(t, v[0]); }, {random(4, 5, 12, 2.0)});
  unary("layer_norm", [](Tape<double>& t, std::span<const Var> v) { return layer_norm(t, v[0], v[1], v[2]); },
        {random(4, 6, 13), random(1, 6, 14), random(1, 6, 15)});
  unary("layer_norm_plain", [](Tape<double>& t, std::span<const Var> v) { return layer_norm(t, v[0]); },
        {random(4, 6, 16)});
  unary("film", [](Tape<double>& t, std::span<const Var> v) { return film(t, v[0], v[1], v[2]); },
        {random(4, 3, 17), random(1, 3, 18), random(1, 3, 19)});
  unary("film_no_shift", [](Tape<double>& t, std::span<const Var> v) { return film(t, v[0], v[1]); },
        {random(4, 3, 20), random(1, 3, 21)});
  unary(
      "concat_rows",
      [](Tape<double>& t, std::span<const Var> v) {
        const std::vector<Var> parts{v[0], v[1], v[0]};
        return concat_rows(t, std::span<const Var>(parts));
      },
      {random(2, 3, 22), random(3, 3, 23)});
  unary("slice_rows", [](Tape<double>& t, std::span<const Var> v) { return slice_rows(t, v[0], 1, 2); },
        {random(4, 3, 24)});
  unary("slice_cols", [](Tape<double>& t, std::span<const Var> v) { return slice_cols(t, v[0], 1, 3); },
        {random(2, 5, 25)});
  unary(
      "gather_rows",
      [](Tape<double>& t, std::span<const Var> v) {
        const std::vector<Eigen::Index> rows{2, 0, 2, 1};
        return gather_rows(t, v[0], std::span<const Eigen::Index>(rows));
      },
      {random(3, 3, 26)});
  unary("attention", [](Tape<double>& t, std::span<const Var> v) { return attention(t, v[0], v[1], v[2], 2); },
        {random(3, 4, 27), random(5, 4, 28), random(5, 4, 29)});
  const std::vector<M> red{random(3, 4, 30), random(3, 4, 31)};
  c.push_back({"mse", [](Tape<double>& t, std::span<const Var> v) { return mse(t, v[0], v[1]); }, red});
  c.push_back({"mean", [](Tape<double>& t, std::span<const Var> v) { return mean(t, mul(t, v[0], v[0])); }, red});
  c.push_back({"sum", [](Tape<double>& t, std::span<const Var> v) { return sum(t, mul(t, v[0], v[1])); }, red});
  c.push_back(joint_attention_case());
  return c;
}

/// Randomizes every parameter so that zero-initialized projections carry signal.
inline diff::ParameterSet<double> perturbed(const model::Params& p, std::uint64_t seed, double scale) {
  auto out = p.cast<double>();
  Rng rng(seed);
  for (std::size_t i = 0; i < out.size(); ++i) out.value(i) += standard_normal(out.value(i).rows(), out.value(i).cols(), rng) * scale;
  return out;
}

inline model::ExperimentBundle random_bundle(int d, int k, int cells, std::uint64_t seed) {
  Rng rng(seed);
  model::ExperimentBundle b;
  b.y_obs = standard_normal(cells, d, rng);
  for (int i = 0; i < k; ++i) {
    model::ContextExperiment ex;
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

/// The flow-matching loss of a model as a function of all its parameters.
/// `cells` rows per batch with K context experiments.
inline diff::GradCheckResult check_model_loss(const model::ModelConfig& cfg, int cells, std::size_t entries,
                                              std::uint64_t seed) {
  const auto params = perturbed(model::build_model(cfg, seed), seed + 1, 0.1);
  const auto bundle = random_bundle(cfg.max_genes, cfg.max_context, cells, seed + 2);
  Rng rng(seed + 3);
  const Matrix y0 = standard_normal(cells, cfg.max_genes, rng);
  std::vector<M> inputs;
  for (std::size_t i = 0; i < params.size(); ++i) inputs.push_back(params.value(i));
  const ScalarFunction loss = [&](Tape<double>& tape, std::span<const Var> vars) {
    const std::vector<Var> bound(vars.begin(), vars.end());
    return model::cfm_loss<double>(tape, cfg, params, bound, bundle, 0.4, y0, false);
  };
  diff::GradCheckOptions opts;
  opts.max_entries = entries;
  opts.seed = seed + 4;
  return diff::check_gradients(loss, inputs, opts);
}

}  // namespace mappfn::gradient_cases
