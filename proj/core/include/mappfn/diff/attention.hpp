#pragma once

#include <span>
#include <vector>

#include "mappfn/diff/ops.hpp"

namespace mappfn::diff {

/// Per-stream projections of a joint attention layer. Weights are
/// width x attention_width (q, k, v) and attention_width x width (out); biases
/// are 1 x cols rows.
struct AttentionProjections {
  Var q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
};

/// Lexicographic row order of a matrix; ties keep their original order.
template <typename T>
std::vector<Eigen::Index> lexicographic_order(const Mat<T>& m);

/// Inverse of a permutation given as an index vector.
std::vector<Eigen::Index> invert_permutation(std::span<const Eigen::Index> perm);

/// Each stream is projected with its own parameters, tokens are concatenated
/// across streams, attended jointly, split back and projected out per stream.
/// Tokens of every stream are processed in lexicographic order and restored
/// afterwards, so permuting a stream's rows permutes its output rows and leaves
/// every output bit-identical otherwise.
template <typename T>
std::vector<Var> joint_attention(Tape<T>& tape, std::span<const Var> streams,
                                 std::span<const AttentionProjections> params, int heads, int head_dim);

}  // namespace mappfn::diff
