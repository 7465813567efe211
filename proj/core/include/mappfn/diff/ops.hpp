#pragma once

#include <span>
#include <vector>

#include "mappfn/diff/tape.hpp"

namespace mappfn::diff {

// Shapes: every operand is a dense matrix. A "row" operand is 1 x cols and is
// broadcast over the rows of the other operand. An invalid Var (id < 0) passed
// as an optional operand means "absent".

template <typename T> Var matmul(Tape<T>& tape, Var a, Var b);
/// x * w + b, with b an optional 1 x out row.
template <typename T> Var linear(Tape<T>& tape, Var x, Var w, Var b = {});
template <typename T> Var add(Tape<T>& tape, Var a, Var b);
template <typename T> Var sub(Tape<T>& tape, Var a, Var b);
/// Elementwise product.
template <typename T> Var mul(Tape<T>& tape, Var a, Var b);
template <typename T> Var add_row(Tape<T>& tape, Var a, Var row);
template <typename T> Var scale(Tape<T>& tape, Var a, T factor);
template <typename T> Var gelu(Tape<T>& tape, Var x);
template <typename T> Var silu(Tape<T>& tape, Var x);

inline constexpr double kLayerNormEps = 1e-5;
/// Per-row standardization, then optional affine with 1 x cols gain and shift.
template <typename T> Var layer_norm(Tape<T>& tape, Var x, Var gain = {}, Var shift = {});

/// (1 + gamma) * x + beta with 1 x cols gamma and optional beta.
template <typename T> Var film(Tape<T>& tape, Var x, Var gamma, Var beta = {});

template <typename T> Var concat_rows(Tape<T>& tape, std::span<const Var> parts);
template <typename T> Var slice_rows(Tape<T>& tape, Var a, Eigen::Index begin, Eigen::Index count);
template <typename T> Var slice_cols(Tape<T>& tape, Var a, Eigen::Index begin, Eigen::Index count);
/// out.row(i) = a.row(rows[i]).
template <typename T> Var gather_rows(Tape<T>& tape, Var a, std::span<const Eigen::Index> rows);

/// Multi-head scaled dot-product attention. q: nq x width, k and v: nk x width,
/// width = heads * head_dim, softmax scale 1/sqrt(head_dim).
template <typename T> Var attention(Tape<T>& tape, Var q, Var k, Var v, int heads);

/// Softmax attention weights per head (nq x nk each), outside any tape.
template <typename T>
std::vector<Mat<T>> attention_weights(const Mat<T>& q, const Mat<T>& k, int heads);

/// Mean of squared differences over all entries, as a 1 x 1 node.
template <typename T> Var mse(Tape<T>& tape, Var a, Var b);
template <typename T> Var sum(Tape<T>& tape, Var a);
template <typename T> Var mean(Tape<T>& tape, Var a);

/// Wraps a precomputed value that depends on inputs but has no backward rule.
template <typename T> Var opaque(Tape<T>& tape, Mat<T> value, std::span<const Var> inputs);

}  // namespace mappfn::diff
