#include "mappfn/diff/attention.hpp"

#include <algorithm>
#include <numeric>

namespace mappfn::diff {

template <typename T>
std::vector<Eigen::Index> lexicographic_order(const Mat<T>& m) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(m.rows()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&m](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (m(a, j) < m(b, j)) return true;
      if (m(b, j) < m(a, j)) return false;
    }
    return false;
  });
  return order;
}

std::vector<Eigen::Index> invert_permutation(std::span<const Eigen::Index> perm) {
  std::vector<Eigen::Index> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[static_cast<std::size_t>(perm[i])] = static_cast<Eigen::Index>(i);
  return inv;
}

namespace {

bool is_identity(const std::vector<Eigen::Index>& perm) {
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (perm[i] != static_cast<Eigen::Index>(i)) return false;
  }
  return true;
}

}  // namespace

template <typename T>
std::vector<Var> joint_attention(Tape<T>& tape, std::span<const Var> streams,
                                 std::span<const AttentionProjections> params, int heads, int head_dim) {
  if (streams.empty()) throw InvalidArgument("joint_attention: no streams");
  if (streams.size() != params.size()) throw InvalidArgument("joint_attention: one projection set per stream required");
  if (heads < 1 || head_dim < 1) throw InvalidArgument("joint_attention: heads and head_dim must be positive");
  const Eigen::Index width = tape.value(streams[0]).cols();
  const Eigen::Index attn_width = static_cast<Eigen::Index>(heads) * head_dim;

  std::vector<Var> qs, ks, vs;
  std::vector<std::vector<Eigen::Index>> orders;
  std::vector<Eigen::Index> counts;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    // Recording below may reallocate the tape, so nothing keeps a reference to x.
    const auto& x = tape.value(streams[s]);
    const Eigen::Index rows = x.rows();
    if (x.cols() != width) throw InvalidArgument("joint_attention: streams differ in embedding width");
    if (rows < 1) throw InvalidArgument("joint_attention: empty stream");
    const AttentionProjections& p = params[s];
    if (tape.value(p.q_w).rows() != width || tape.value(p.q_w).cols() != attn_width ||
        tape.value(p.k_w).cols() != attn_width || tape.value(p.v_w).cols() != attn_width ||
        tape.value(p.o_w).rows() != attn_width || tape.value(p.o_w).cols() != width) {
      throw InvalidArgument("joint_attention: projection shapes do not match heads * head_dim");
    }
    auto order = lexicographic_order<T>(x);
    Var xs = streams[s];
    if (!is_identity(order)) xs = gather_rows<T>(tape, xs, order);
    qs.push_back(linear<T>(tape, xs, p.q_w, p.q_b));
    ks.push_back(linear<T>(tape, xs, p.k_w, p.k_b));
    vs.push_back(linear<T>(tape, xs, p.v_w, p.v_b));
    counts.push_back(rows);
    orders.push_back(std::move(order));
  }
  Var q = streams.size() == 1 ? qs[0] : concat_rows<T>(tape, qs);
  Var k = streams.size() == 1 ? ks[0] : concat_rows<T>(tape, ks);
  Var v = streams.size() == 1 ? vs[0] : concat_rows<T>(tape, vs);
  Var o = attention<T>(tape, q, k, v, heads);

  std::vector<Var> outputs;
  Eigen::Index offset = 0;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    Var part = streams.size() == 1 ? o : slice_rows<T>(tape, o, offset, counts[s]);
    offset += counts[s];
    Var y = linear<T>(tape, part, params[s].o_w, params[s].o_b);
    if (!is_identity(orders[s])) y = gather_rows<T>(tape, y, invert_permutation(orders[s]));
    outputs.push_back(y);
  }
  return outputs;
}

template std::vector<Eigen::Index> lexicographic_order<float>(const Mat<float>&);
template std::vector<Eigen::Index> lexicographic_order<double>(const Mat<double>&);
template std::vector<Var> joint_attention<float>(Tape<float>&, std::span<const Var>,
                                                 std::span<const AttentionProjections>, int, int);
template std::vector<Var> joint_attention<double>(Tape<double>&, std::span<const Var>,
                                                  std::span<const AttentionProjections>, int, int);

}  // namespace mappfn::diff
