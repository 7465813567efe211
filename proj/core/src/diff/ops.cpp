#include "mappfn/diff/ops.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace mappfn::diff {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw InvalidArgument(what);
}

template <typename T>
void require_row(const Tape<T>& tape, Var row, Eigen::Index cols, const char* what) {
  const auto& r = tape.value(row);
  require(r.rows() == 1 && r.cols() == cols, what);
}

}  // namespace

template <typename T>
Var matmul(Tape<T>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  require(av.cols() == bv.rows(), "matmul: inner dimensions differ");
  Mat<T> out = av * bv;
  return tape.record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Mat<T>& g) {
    if (t.requires_grad(a)) t.accumulate(a, g * t.value(b).transpose());
    if (t.requires_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
  });
}

template <typename T>
Var linear(Tape<T>& tape, Var x, Var w, Var b) {
  const auto& xv = tape.value(x);
  const auto& wv = tape.value(w);
  require(xv.cols() == wv.rows(), "linear: input width does not match weight rows");
  Mat<T> out = xv * wv;
  if (b.valid()) {
    require_row(tape, b, wv.cols(), "linear: bias must be 1 x out");
    out.rowwise() += tape.value(b).row(0);
  }
  return tape.record(std::move(out), {x, w, b}, [x, w, b](Tape<T>& t, const Mat<T>& g) {
    if (t.requires_grad(x)) t.accumulate(x, g * t.value(w).transpose());
    if (t.requires_grad(w)) t.accumulate(w, t.value(x).transpose() * g);
    if (b.valid() && t.requires_grad(b)) t.accumulate(b, g.colwise().sum());
  });
}

template <typename T>
Var add(Tape<T>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "add: shape mismatch");
  Mat<T> out = av + bv;
  return tape.record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Mat<T>& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

template <typename T>
Var sub(Tape<T>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "sub: shape mismatch");
  Mat<T> out = av - bv;
  return tape.record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Mat<T>& g) {
    t.accumulate(a, g);
    if (t.requires_grad(b)) t.accumulate(b, -g);
  });
}

template <typename T>
Var mul(Tape<T>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "mul: shape mismatch");
  Mat<T> out = av.cwiseProduct(bv);
  return tape.record(std::move(out), {a, b}, [a, b](Tape<T>& t, const Mat<T>& g) {
    if (t.requires_grad(a)) t.accumulate(a, g.cwiseProduct(t.value(b)));
    if (t.requires_grad(b)) t.accumulate(b, g.cwiseProduct(t.value(a)));
  });
}

template <typename T>
Var add_row(Tape<T>& tape, Var a, Var row) {
  const auto& av = tape.value(a);
  require_row(tape, row, av.cols(), "add_row: row must be 1 x cols");
  Mat<T> out = av;
  out.rowwise() += tape.value(row).row(0);
  return tape.record(std::move(out), {a, row}, [a, row](Tape<T>& t, const Mat<T>& g) {
    t.accumulate(a, g);
    if (t.requires_grad(row)) t.accumulate(row, g.colwise().sum());
  });
}

template <typename T>
Var scale(Tape<T>& tape, Var a, T factor) {
  Mat<T> out = tape.value(a) * factor;
  return tape.record(std::move(out), {a}, [a, factor](Tape<T>& t, const Mat<T>& g) {
    t.accumulate(a, g * factor);
  });
}

template <typename T>
Var gelu(Tape<T>& tape, Var x) {
  static constexpr T kC = static_cast<T>(0.7978845608028654);  // sqrt(2/pi)
  static constexpr T kA = static_cast<T>(0.044715);
  const auto& xv = tape.value(x);
  Mat<T> th = (kC * (xv.array() + kA * xv.array().cube())).tanh().matrix();
  Mat<T> out = (static_cast<T>(0.5) * xv.array() * (static_cast<T>(1) + th.array())).matrix();
  return tape.record(std::move(out), {x}, [x, th = std::move(th)](Tape<T>& t, const Mat<T>& g) {
    const auto xa = t.value(x).array();
    const auto d = static_cast<T>(0.5) * (static_cast<T>(1) + th.array()) +
                   static_cast<T>(0.5) * xa * (static_cast<T>(1) - th.array().square()) * kC *
                       (static_cast<T>(1) + static_cast<T>(3) * kA * xa.square());
    t.accumulate(x, (g.array() * d).matrix());
  });
}

template <typename T>
Var silu(Tape<T>& tape, Var x) {
  const auto& xv = tape.value(x);
  Mat<T> sig = (static_cast<T>(1) / (static_cast<T>(1) + (-xv.array()).exp())).matrix();
  Mat<T> out = xv.cwiseProduct(sig);
  return tape.record(std::move(out), {x}, [x, sig = std::move(sig)](Tape<T>& t, const Mat<T>& g) {
    const auto s = sig.array();
    const auto d = s * (static_cast<T>(1) + t.value(x).array() * (static_cast<T>(1) - s));
    t.accumulate(x, (g.array() * d).matrix());
  });
}

template <typename T>
Var layer_norm(Tape<T>& tape, Var x, Var gain, Var shift) {
  const auto& xv = tape.value(x);
  const Eigen::Index n = xv.rows();
  const Eigen::Index c = xv.cols();
  require(c >= 1, "layer_norm: width must be at least 1");
  if (gain.valid()) require_row(tape, gain, c, "layer_norm: gain must be 1 x width");
  if (shift.valid()) require_row(tape, shift, c, "layer_norm: shift must be 1 x width");
  Mat<T> xhat(n, c);
  Eigen::Matrix<T, Eigen::Dynamic, 1> inv_std(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const T mu = xv.row(i).mean();
    const T var = (xv.row(i).array() - mu).square().mean();
    inv_std(i) = static_cast<T>(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    xhat.row(i) = (xv.row(i).array() - mu) * inv_std(i);
  }
  Mat<T> out = xhat;
  if (gain.valid()) out.array().rowwise() *= tape.value(gain).row(0).array();
  if (shift.valid()) out.rowwise() += tape.value(shift).row(0);
  return tape.record(
      std::move(out), {x, gain, shift},
      [x, gain, shift, xhat = std::move(xhat), inv_std = std::move(inv_std)](Tape<T>& t, const Mat<T>& g) {
        if (gain.valid() && t.requires_grad(gain)) t.accumulate(gain, g.cwiseProduct(xhat).colwise().sum());
        if (shift.valid() && t.requires_grad(shift)) t.accumulate(shift, g.colwise().sum());
        if (!t.requires_grad(x)) return;
        Mat<T> dxhat = g;
        if (gain.valid()) dxhat.array().rowwise() *= t.value(gain).row(0).array();
        const T inv_c = static_cast<T>(1) / static_cast<T>(xhat.cols());
        Mat<T> dx(xhat.rows(), xhat.cols());
        for (Eigen::Index i = 0; i < xhat.rows(); ++i) {
          const T m1 = dxhat.row(i).sum() * inv_c;
          const T m2 = dxhat.row(i).dot(xhat.row(i)) * inv_c;
          dx.row(i) = inv_std(i) * (dxhat.row(i).array() - m1 - xhat.row(i).array() * m2);
        }
        t.accumulate(x, dx);
      });
}

template <typename T>
Var film(Tape<T>& tape, Var x, Var gamma, Var beta) {
  const auto& xv = tape.value(x);
  require_row(tape, gamma, xv.cols(), "film: gamma must be 1 x width");
  if (beta.valid()) require_row(tape, beta, xv.cols(), "film: beta must be 1 x width");
  Mat<T> out = xv;
  out.array().rowwise() *= (tape.value(gamma).row(0).array() + static_cast<T>(1));
  if (beta.valid()) out.rowwise() += tape.value(beta).row(0);
  return tape.record(std::move(out), {x, gamma, beta}, [x, gamma, beta](Tape<T>& t, const Mat<T>& g) {
    if (t.requires_grad(x)) {
      Mat<T> dx = g;
      dx.array().rowwise() *= (t.value(gamma).row(0).array() + static_cast<T>(1));
      t.accumulate(x, dx);
    }
    if (t.requires_grad(gamma)) t.accumulate(gamma, g.cwiseProduct(t.value(x)).colwise().sum());
    if (beta.valid() && t.requires_grad(beta)) t.accumulate(beta, g.colwise().sum());
  });
}

template <typename T>
Var concat_rows(Tape<T>& tape, std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows: no parts");
  const Eigen::Index c = tape.value(parts[0]).cols();
  Eigen::Index rows = 0;
  for (const Var p : parts) {
    require(tape.value(p).cols() == c, "concat_rows: width mismatch");
    rows += tape.value(p).rows();
  }
  Mat<T> out(rows, c);
  std::vector<Eigen::Index> offsets;
  offsets.reserve(parts.size());
  Eigen::Index r = 0;
  for (const Var p : parts) {
    offsets.push_back(r);
    const auto& v = tape.value(p);
    out.middleRows(r, v.rows()) = v;
    r += v.rows();
  }
  std::vector<Var> ids(parts.begin(), parts.end());
  return tape.record(std::move(out), parts,
                     [ids, offsets = std::move(offsets)](Tape<T>& t, const Mat<T>& g) {
                       for (std::size_t i = 0; i < ids.size(); ++i) {
                         if (!t.requires_grad(ids[i])) continue;
                         t.accumulate(ids[i], g.middleRows(offsets[i], t.value(ids[i]).rows()));
                       }
                     });
}

template <typename T>
Var slice_rows(Tape<T>& tape, Var a, Eigen::Index begin, Eigen::Index count) {
  const auto& av = tape.value(a);
  require(begin >= 0 && count >= 0 && begin + count <= av.rows(), "slice_rows: range out of bounds");
  Mat<T> out = av.middleRows(begin, count);
  return tape.record(std::move(out), {a}, [a, begin, count](Tape<T>& t, const Mat<T>& g) {
    const auto& av = t.value(a);
    Mat<T> full = Mat<T>::Zero(av.rows(), av.cols());
    full.middleRows(begin, count) = g;
    t.accumulate(a, full);
  });
}

template <typename T>
Var slice_cols(Tape<T>& tape, Var a, Eigen::Index begin, Eigen::Index count) {
  const auto& av = tape.value(a);
  require(begin >= 0 && count >= 0 && begin + count <= av.cols(), "slice_cols: range out of bounds");
  Mat<T> out = av.middleCols(begin, count);
  return tape.record(std::move(out), {a}, [a, begin, count](Tape<T>& t, const Mat<T>& g) {
    const auto& av = t.value(a);
    Mat<T> full = Mat<T>::Zero(av.rows(), av.cols());
    full.middleCols(begin, count) = g;
    t.accumulate(a, full);
  });
}

template <typename T>
Var gather_rows(Tape<T>& tape, Var a, std::span<const Eigen::Index> rows) {
  const auto& av = tape.value(a);
  Mat<T> out(static_cast<Eigen::Index>(rows.size()), av.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && rows[i] < av.rows(), "gather_rows: index out of bounds");
    out.row(static_cast<Eigen::Index>(i)) = av.row(rows[i]);
  }
  std::vector<Eigen::Index> idx(rows.begin(), rows.end());
  return tape.record(std::move(out), {a}, [a, idx = std::move(idx)](Tape<T>& t, const Mat<T>& g) {
    const auto& av = t.value(a);
    Mat<T> full = Mat<T>::Zero(av.rows(), av.cols());
    for (std::size_t i = 0; i < idx.size(); ++i) full.row(idx[i]) += g.row(static_cast<Eigen::Index>(i));
    t.accumulate(a, full);
  });
}

template <typename T>
std::vector<Mat<T>> attention_weights(const Mat<T>& q, const Mat<T>& k, int heads) {
  require(heads >= 1, "attention: heads must be positive");
  require(q.cols() == k.cols(), "attention: query and key widths differ");
  require(q.cols() % heads == 0, "attention: width is not divisible by heads");
  require(k.rows() >= 1, "attention: no keys");
  const Eigen::Index hd = q.cols() / heads;
  const T s = static_cast<T>(1) / std::sqrt(static_cast<T>(hd));
  std::vector<Mat<T>> probs;
  probs.reserve(static_cast<std::size_t>(heads));
  for (int h = 0; h < heads; ++h) {
    Mat<T> p = (q.middleCols(h * hd, hd) * k.middleCols(h * hd, hd).transpose()) * s;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const T m = p.row(i).maxCoeff();
      p.row(i) = (p.row(i).array() - m).exp();
      p.row(i) /= p.row(i).sum();
    }
    probs.push_back(std::move(p));
  }
  return probs;
}

template <typename T>
Var attention(Tape<T>& tape, Var q, Var k, Var v, int heads) {
  const auto& qv = tape.value(q);
  const auto& kv = tape.value(k);
  const auto& vv = tape.value(v);
  require(kv.rows() == vv.rows() && kv.cols() == vv.cols(), "attention: key/value shapes differ");
  std::vector<Mat<T>> probs = attention_weights<T>(qv, kv, heads);
  const Eigen::Index hd = qv.cols() / heads;
  Mat<T> out(qv.rows(), qv.cols());
  for (int h = 0; h < heads; ++h) {
    out.middleCols(h * hd, hd).noalias() = probs[static_cast<std::size_t>(h)] * vv.middleCols(h * hd, hd);
  }
  return tape.record(
      std::move(out), {q, k, v}, [q, k, v, heads, hd, probs = std::move(probs)](Tape<T>& t, const Mat<T>& g) {
        const auto& qv = t.value(q);
        const auto& kv = t.value(k);
        const auto& vv = t.value(v);
        const T s = static_cast<T>(1) / std::sqrt(static_cast<T>(hd));
        Mat<T> dq = Mat<T>::Zero(qv.rows(), qv.cols());
        Mat<T> dk = Mat<T>::Zero(kv.rows(), kv.cols());
        Mat<T> dv = Mat<T>::Zero(vv.rows(), vv.cols());
        for (int h = 0; h < heads; ++h) {
          const Mat<T>& p = probs[static_cast<std::size_t>(h)];
          const auto gh = g.middleCols(h * hd, hd);
          dv.middleCols(h * hd, hd).noalias() = p.transpose() * gh;
          Mat<T> dp = gh * vv.middleCols(h * hd, hd).transpose();
          Eigen::Matrix<T, Eigen::Dynamic, 1> rs = dp.cwiseProduct(p).rowwise().sum();
          Mat<T> ds = p.cwiseProduct(dp.colwise() - rs) * s;
          dq.middleCols(h * hd, hd).noalias() = ds * kv.middleCols(h * hd, hd);
          dk.middleCols(h * hd, hd).noalias() = ds.transpose() * qv.middleCols(h * hd, hd);
        }
        t.accumulate(q, dq);
        t.accumulate(k, dk);
        t.accumulate(v, dv);
      });
}

template <typename T>
Var mse(Tape<T>& tape, Var a, Var b) {
  const auto& av = tape.value(a);
  const auto& bv = tape.value(b);
  require(av.rows() == bv.rows() && av.cols() == bv.cols(), "mse: shape mismatch");
  require(av.size() > 0, "mse: empty operands");
  Mat<T> diff = av - bv;
  Mat<T> out(1, 1);
  out(0, 0) = diff.squaredNorm() / static_cast<T>(diff.size());
  return tape.record(std::move(out), {a, b}, [a, b, diff = std::move(diff)](Tape<T>& t, const Mat<T>& g) {
    const T f = static_cast<T>(2) * g(0, 0) / static_cast<T>(diff.size());
    if (t.requires_grad(a)) t.accumulate(a, diff * f);
    if (t.requires_grad(b)) t.accumulate(b, diff * (-f));
  });
}

template <typename T>
Var sum(Tape<T>& tape, Var a) {
  Mat<T> out(1, 1);
  out(0, 0) = tape.value(a).sum();
  return tape.record(std::move(out), {a}, [a](Tape<T>& t, const Mat<T>& g) {
    const auto& av = t.value(a);
    t.accumulate(a, Mat<T>::Constant(av.rows(), av.cols(), g(0, 0)));
  });
}

template <typename T>
Var mean(Tape<T>& tape, Var a) {
  const auto& av = tape.value(a);
  require(av.size() > 0, "mean: empty operand");
  Mat<T> out(1, 1);
  out(0, 0) = av.mean();
  return tape.record(std::move(out), {a}, [a](Tape<T>& t, const Mat<T>& g) {
    const auto& av = t.value(a);
    t.accumulate(a, Mat<T>::Constant(av.rows(), av.cols(), g(0, 0) / static_cast<T>(av.size())));
  });
}

template <typename T>
Var opaque(Tape<T>& tape, Mat<T> value, std::span<const Var> inputs) {
  return tape.record_opaque(std::move(value), inputs);
}

#define MAPPFN_INSTANTIATE_OPS(T)                                                          \
  template Var matmul<T>(Tape<T>&, Var, Var);                                              \
  template Var linear<T>(Tape<T>&, Var, Var, Var);                                         \
  template Var add<T>(Tape<T>&, Var, Var);                                                 \
  template Var sub<T>(Tape<T>&, Var, Var);                                                 \
  template Var mul<T>(Tape<T>&, Var, Var);                                                 \
  template Var add_row<T>(Tape<T>&, Var, Var);                                             \
  template Var scale<T>(Tape<T>&, Var, T);                                                 \
  template Var gelu<T>(Tape<T>&, Var);                                                     \
  template Var silu<T>(Tape<T>&, Var);                                                     \
  template Var layer_norm<T>(Tape<T>&, Var, Var, Var);                                     \
  template Var film<T>(Tape<T>&, Var, Var, Var);                                           \
  template Var concat_rows<T>(Tape<T>&, std::span<const Var>);                             \
  template Var slice_rows<T>(Tape<T>&, Var, Eigen::Index, Eigen::Index);                   \
  template Var slice_cols<T>(Tape<T>&, Var, Eigen::Index, Eigen::Index);                   \
  template Var gather_rows<T>(Tape<T>&, Var, std::span<const Eigen::Index>);               \
  template Var attention<T>(Tape<T>&, Var, Var, Var, int);                                 \
  template std::vector<Mat<T>> attention_weights<T>(const Mat<T>&, const Mat<T>&, int);    \
  template Var mse<T>(Tape<T>&, Var, Var);                                                 \
  template Var sum<T>(Tape<T>&, Var);                                                      \
  template Var mean<T>(Tape<T>&, Var);                                                     \
  template Var opaque<T>(Tape<T>&, Mat<T>, std::span<const Var>);

MAPPFN_INSTANTIATE_OPS(float)
MAPPFN_INSTANTIATE_OPS(double)

}  // namespace mappfn::diff
