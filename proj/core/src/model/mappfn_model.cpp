#include "mappfn/model/mappfn_model.hpp"

#include <array>
#include <cmath>
#include <string>

#include "mappfn/diff/attention.hpp"
#include "mappfn/diff/ops.hpp"

namespace mappfn::model {

namespace {

using diff::Mat;
using diff::Var;

constexpr std::array<const char*, 3> kStreams{"noise", "cell", "treat"};

std::string block_name(int layer, const char* stream, const char* leaf) {
  return "blocks." + std::to_string(layer) + "." + stream + "." + leaf;
}

Mat<float> xavier(int fan_in, int fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  std::uniform_real_distribution<double> u(-a, a);
  Mat<float> w(fan_in, fan_out);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<float>(u(rng));
  return w;
}

Mat<float> gaussian(int rows, int cols, double std, Rng& rng) {
  std::normal_distribution<double> n(0.0, std);
  Mat<float> w(rows, cols);
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = static_cast<float>(n(rng));
  return w;
}

void add_linear(Params& p, const std::string& name, int in, int out, Rng& rng, bool zero = false) {
  p.add(name + ".w", zero ? Mat<float>::Zero(in, out) : xavier(in, out, rng));
  p.add(name + ".b", Mat<float>::Zero(1, out));
}

void add_norm(Params& p, const std::string& name, int width) {
  p.add(name + ".g", Mat<float>::Ones(1, width));
  p.add(name + ".b", Mat<float>::Zero(1, width));
}

template <typename T>
Mat<T> sorted_rows(const Matrix& m) {
  Mat<T> cast = m.cast<T>();
  const auto order = diff::lexicographic_order<T>(cast);
  Mat<T> out(cast.rows(), cast.cols());
  for (std::size_t i = 0; i < order.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = cast.row(order[i]);
  return out;
}

template <typename T>
Mat<T> time_features(double tau, int width) {
  const int half = width / 2;
  Mat<T> f(1, width);
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    const double arg = tau * 1000.0 * freq;
    f(0, i) = static_cast<T>(std::sin(arg));
    f(0, half + i) = static_cast<T>(std::cos(arg));
  }
  return f;
}

template <typename T>
class Binding {
 public:
  Binding(const diff::ParameterSet<T>& params, const std::vector<Var>& bound) : params_(params), bound_(bound) {
    if (bound.size() != params.size()) throw InvalidArgument("forward: binding does not match parameter set");
  }
  Var operator()(const std::string& name) const { return bound_[params_.index(name)]; }
  Var block(int layer, const char* stream, const char* leaf) const { return (*this)(block_name(layer, stream, leaf)); }

 private:
  const diff::ParameterSet<T>& params_;
  const std::vector<Var>& bound_;
};

}  // namespace

Params build_model(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(mix_seed(seed, 0, 0, SeedRole::kConfig));
  const int e = cfg.embed_dim;
  const int a = cfg.attention_width();
  const int d = cfg.max_genes;
  Params p;
  add_linear(p, "time.l1", e, e, rng);
  add_linear(p, "time.l2", e, e, rng);
  add_linear(p, "in.noise", d, e, rng);
  add_linear(p, "in.cell", d, e, rng);
  add_linear(p, "in.treat", d, e, rng);
  if (cfg.register_tokens > 0) p.add("emb.registers", gaussian(cfg.register_tokens, e, 0.02, rng));
  if (cfg.max_context > 0) p.add("emb.slot", gaussian(cfg.max_context, e, 0.02, rng));
  p.add("emb.obs_int", gaussian(2, e, 0.02, rng));
  p.add("emb.query_context", gaussian(2, e, 0.02, rng));
  p.add("emb.null", gaussian(1, e, 0.02, rng));
  for (int l = 0; l < cfg.layers; ++l) {
    for (const char* s : kStreams) {
      add_linear(p, block_name(l, s, "mod"), e, 6 * e, rng, true);
      add_norm(p, block_name(l, s, "ln1"), e);
      add_linear(p, block_name(l, s, "q"), e, a, rng);
      add_linear(p, block_name(l, s, "k"), e, a, rng);
      add_linear(p, block_name(l, s, "v"), e, a, rng);
      add_linear(p, block_name(l, s, "o"), a, e, rng);
      add_norm(p, block_name(l, s, "ln2"), e);
      add_linear(p, block_name(l, s, "ff1"), e, cfg.ff_dim, rng);
      add_linear(p, block_name(l, s, "ff2"), cfg.ff_dim, e, rng);
    }
  }
  add_linear(p, "final.mod", e, 2 * e, rng, true);
  add_norm(p, "final.ln", e);
  add_linear(p, "out", e, d, rng, true);
  return p;
}

void validate_bundle(const ModelConfig& cfg, const ExperimentBundle& bundle, bool drop_condition) {
  const Eigen::Index d = cfg.max_genes;
  if (bundle.context_size() > cfg.max_context) {
    throw InvalidArgument("bundle: context size " + std::to_string(bundle.context_size()) + " exceeds maximum " +
                          std::to_string(cfg.max_context));
  }
  if (drop_condition) return;
  if (bundle.y_obs.cols() != d) throw InvalidArgument("bundle: observational width does not match the model");
  if (bundle.y_obs.rows() < 1) throw InvalidArgument("bundle: observational batch is empty");
  if (bundle.query_treatment.size() != d) throw InvalidArgument("bundle: query treatment width does not match the model");
  for (const auto& ex : bundle.context) {
    if (ex.treatment.size() != d || ex.samples.cols() != d) {
      throw InvalidArgument("bundle: context experiment width does not match the model");
    }
    if (ex.samples.rows() < 1) throw InvalidArgument("bundle: empty context experiment");
  }
}

template <typename T>
Var forward(diff::Tape<T>& tape, const ModelConfig& cfg, const diff::ParameterSet<T>& params,
            const std::vector<Var>& bound, const Mat<T>& y_tau, double tau, const ExperimentBundle& bundle,
            bool drop_condition) {
  using namespace diff;
  const Eigen::Index d = cfg.max_genes;
  const int e = cfg.embed_dim;
  if (y_tau.cols() != d) throw InvalidArgument("forward: query width does not match the model");
  if (y_tau.rows() < 1) throw InvalidArgument("forward: empty query batch");
  validate_bundle(cfg, bundle, drop_condition);
  const Binding<T> P(params, bound);

  // Time conditioning shared by every modulation.
  Var temb = linear<T>(tape, tape.constant(time_features<T>(tau, e)), P("time.l1.w"), P("time.l1.b"));
  temb = linear<T>(tape, silu<T>(tape, temb), P("time.l2.w"), P("time.l2.b"));
  const Var cond = silu<T>(tape, temb);

  // Stream 1: query tokens in canonical order plus registers.
  const auto q_order = lexicographic_order<T>(y_tau);
  Mat<T> y_sorted(y_tau.rows(), y_tau.cols());
  for (std::size_t i = 0; i < q_order.size(); ++i) y_sorted.row(static_cast<Eigen::Index>(i)) = y_tau.row(q_order[i]);
  const Eigen::Index m = y_tau.rows();
  Var noise = linear<T>(tape, tape.constant(std::move(y_sorted)), P("in.noise.w"), P("in.noise.b"));
  if (cfg.register_tokens > 0) {
    const std::array<Var, 2> parts{noise, P("emb.registers")};
    noise = concat_rows<T>(tape, parts);
  }

  std::vector<Var> streams{noise};
  std::vector<const char*> names{kStreams[0]};
  if (drop_condition) {
    streams.push_back(P("emb.null"));
    names.push_back(kStreams[1]);
  } else {
    const int k = bundle.context_size();
    // Stream 2: observational cells, then each context batch.
    Eigen::Index total = bundle.y_obs.rows();
    for (const auto& ex : bundle.context) total += ex.samples.rows();
    Mat<T> cells(total, d);
    std::vector<Eigen::Index> flag_idx(static_cast<std::size_t>(total), 1);
    std::vector<Eigen::Index> slot_idx;
    const Eigen::Index n_obs = bundle.y_obs.rows();
    cells.topRows(n_obs) = sorted_rows<T>(bundle.y_obs);
    std::fill(flag_idx.begin(), flag_idx.begin() + n_obs, 0);
    Eigen::Index row = n_obs;
    for (int s = 0; s < k; ++s) {
      const Matrix& batch = bundle.context[static_cast<std::size_t>(s)].samples;
      cells.middleRows(row, batch.rows()) = sorted_rows<T>(batch);
      slot_idx.insert(slot_idx.end(), static_cast<std::size_t>(batch.rows()), s);
      row += batch.rows();
    }
    Var cell = linear<T>(tape, tape.constant(std::move(cells)), P("in.cell.w"), P("in.cell.b"));
    cell = add<T>(tape, cell, gather_rows<T>(tape, P("emb.obs_int"), flag_idx));
    if (k > 0) {
      const std::array<Var, 2> parts{tape.constant(Mat<T>::Zero(n_obs, e)),
                                     gather_rows<T>(tape, P("emb.slot"), slot_idx)};
      cell = add<T>(tape, cell, concat_rows<T>(tape, parts));
    }
    streams.push_back(cell);
    names.push_back(kStreams[1]);

    // Stream 3: context treatment tokens, then the query treatment token.
    Mat<T> codes(k + 1, d);
    for (int s = 0; s < k; ++s) codes.row(s) = bundle.context[static_cast<std::size_t>(s)].treatment.transpose().cast<T>();
    codes.row(k) = bundle.query_treatment.transpose().cast<T>();
    std::vector<Eigen::Index> role_idx(static_cast<std::size_t>(k), 1);
    role_idx.push_back(0);
    Var treat = linear<T>(tape, tape.constant(std::move(codes)), P("in.treat.w"), P("in.treat.b"));
    treat = add<T>(tape, treat, gather_rows<T>(tape, P("emb.query_context"), role_idx));
    if (k > 0) {
      std::vector<Eigen::Index> slots(static_cast<std::size_t>(k));
      for (int s = 0; s < k; ++s) slots[static_cast<std::size_t>(s)] = s;
      const std::array<Var, 2> parts{gather_rows<T>(tape, P("emb.slot"), slots), tape.constant(Mat<T>::Zero(1, e))};
      treat = add<T>(tape, treat, concat_rows<T>(tape, parts));
    }
    streams.push_back(treat);
    names.push_back(kStreams[2]);
  }

  for (int l = 0; l < cfg.layers; ++l) {
    std::vector<std::array<Var, 6>> mods;
    std::vector<Var> normed;
    std::vector<AttentionProjections> proj;
    for (std::size_t s = 0; s < streams.size(); ++s) {
      const Var mod = linear<T>(tape, cond, P.block(l, names[s], "mod.w"), P.block(l, names[s], "mod.b"));
      std::array<Var, 6> parts;
      for (int c = 0; c < 6; ++c) parts[static_cast<std::size_t>(c)] = slice_cols<T>(tape, mod, c * e, e);
      mods.push_back(parts);
      const Var h = layer_norm<T>(tape, streams[s], P.block(l, names[s], "ln1.g"), P.block(l, names[s], "ln1.b"));
      normed.push_back(film<T>(tape, h, parts[0], parts[1]));
      proj.push_back({P.block(l, names[s], "q.w"), P.block(l, names[s], "q.b"), P.block(l, names[s], "k.w"),
                      P.block(l, names[s], "k.b"), P.block(l, names[s], "v.w"), P.block(l, names[s], "v.b"),
                      P.block(l, names[s], "o.w"), P.block(l, names[s], "o.b")});
    }
    const auto attn = joint_attention<T>(tape, normed, proj, cfg.heads, cfg.head_dim);
    for (std::size_t s = 0; s < streams.size(); ++s) {
      const auto& md = mods[s];
      Var x = add<T>(tape, streams[s], film<T>(tape, attn[s], md[2]));
      Var h = film<T>(tape, layer_norm<T>(tape, x, P.block(l, names[s], "ln2.g"), P.block(l, names[s], "ln2.b")),
                      md[3], md[4]);
      h = linear<T>(tape, h, P.block(l, names[s], "ff1.w"), P.block(l, names[s], "ff1.b"));
      h = linear<T>(tape, gelu<T>(tape, h), P.block(l, names[s], "ff2.w"), P.block(l, names[s], "ff2.b"));
      streams[s] = add<T>(tape, x, film<T>(tape, h, md[5]));
    }
  }

  Var out = cfg.register_tokens > 0 ? slice_rows<T>(tape, streams[0], 0, m) : streams[0];
  const Var fmod = linear<T>(tape, cond, P("final.mod.w"), P("final.mod.b"));
  out = layer_norm<T>(tape, out, P("final.ln.g"), P("final.ln.b"));
  out = film<T>(tape, out, slice_cols<T>(tape, fmod, 0, e), slice_cols<T>(tape, fmod, e, e));
  out = linear<T>(tape, out, P("out.w"), P("out.b"));
  return gather_rows<T>(tape, out, invert_permutation(q_order));
}

Matrix predict_velocity(const ModelConfig& cfg, const Params& params, const Matrix& y_tau, double tau,
                        const ExperimentBundle& bundle, bool drop_condition) {
  diff::Tape<float> tape;
  const auto bound = diff::bind(tape, params, false);
  const Var v = forward<float>(tape, cfg, params, bound, y_tau.cast<float>(), tau, bundle, drop_condition);
  return tape.value(v).cast<double>();
}

template <typename T>
Var cfm_loss(diff::Tape<T>& tape, const ModelConfig& cfg, const diff::ParameterSet<T>& params,
             const std::vector<Var>& bound, const ExperimentBundle& bundle, double tau, const Matrix& y0,
             bool drop_condition) {
  if (y0.rows() != bundle.target.rows() || y0.cols() != bundle.target.cols()) {
    throw InvalidArgument("cfm_loss: noise and target shapes differ");
  }
  const Matrix y_tau = (1.0 - tau) * y0 + tau * bundle.target;
  const Var v = forward<T>(tape, cfg, params, bound, y_tau.cast<T>(), tau, bundle, drop_condition);
  const Var target = tape.constant((bundle.target - y0).cast<T>());
  return diff::mse<T>(tape, v, target);
}

template Var forward<float>(diff::Tape<float>&, const ModelConfig&, const diff::ParameterSet<float>&,
                            const std::vector<Var>&, const Mat<float>&, double, const ExperimentBundle&, bool);
template Var forward<double>(diff::Tape<double>&, const ModelConfig&, const diff::ParameterSet<double>&,
                             const std::vector<Var>&, const Mat<double>&, double, const ExperimentBundle&, bool);
template Var cfm_loss<float>(diff::Tape<float>&, const ModelConfig&, const diff::ParameterSet<float>&,
                             const std::vector<Var>&, const ExperimentBundle&, double, const Matrix&, bool);
template Var cfm_loss<double>(diff::Tape<double>&, const ModelConfig&, const diff::ParameterSet<double>&,
                              const std::vector<Var>&, const ExperimentBundle&, double, const Matrix&, bool);

}  // namespace mappfn::model
