#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "rieif/ndgrad/tape.hpp"

namespace rieif::nd {

// Binary elementwise ops accept equal shapes, or a smaller operand whose shape is a
// suffix of the larger one (it is tiled across the leading axes, e.g. a bias row).

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
/// a / (b + eps)
Var div(const Var& a, const Var& b, double eps = 0.0);

Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);

/// [m,k] x [k,n] -> [m,n]
Var matmul(const Var& a, const Var& b);
/// Batched: [g,m,k] x [g,k,n] -> [g,m,n]; with transpose_b, b is [g,n,k].
Var bmm(const Var& a, const Var& b, bool transpose_b = false);

/// ln(1 + e^x), evaluated without overflow.
Var softplus(const Var& a);
Var sigmoid(const Var& a);
Var tanh(const Var& a);
Var square(const Var& a);
Var sqrt(const Var& a);

Var sum(const Var& a);
Var mean(const Var& a);

Var concat(std::span<const Var> parts, std::size_t axis);
Var slice(const Var& a, std::size_t axis, std::size_t begin, std::size_t end);
Var reshape(const Var& a, Shape shape);
/// Merges axes [from_axis, rank) into one.
Var flatten(const Var& a, std::size_t from_axis = 1);
/// Rank-4 [A,B,C,D] -> [A,C,B,D].
Var swap_axes_12(const Var& a);

/// Rows of axis 0 picked by index (repeats allowed).
Var gather_rows(const Var& a, std::vector<std::size_t> rows);
/// Each axis-0 row repeated `times` times consecutively.
Var repeat_rows(const Var& a, std::size_t times);

/// x / (||x||_2 + eps) along the last axis.
Var l2_normalize(const Var& a, double eps);

/// Boolean [m,n] mask of admissible (row, column) pairs, shared between calls.
struct SoftmaxMask {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> allowed;
};

/// Softmax over the last axis of scores [..., m, n] restricted to mask-admissible
/// entries. Excluded entries get weight exactly 0; rows with no admissible entry are all 0.
Var masked_softmax(const Var& scores, std::shared_ptr<const SoftmaxMask> mask);

/// Multi-head attention on rows laid out [G*N, H*dk] (head h owns columns h*dk..h*dk+dk-1).
/// Query node i of a group attends only to the mask-admissible keys of that group. Same
/// result as splitting heads and applying masked_softmax(scale * q k^T) then v, without
/// materialising the N x N scores. `weights`, if set, receives the dense [G*H, N, N] attention.
Var masked_attention(const Var& q, const Var& k, const Var& v, std::size_t nodes, std::size_t heads, double scale,
                     std::shared_ptr<const SoftmaxMask> mask, Array* weights = nullptr);

// Plain-array helpers used outside the tape.
double softplus(double x);
double sigmoid(double x);

}  // namespace rieif::nd
