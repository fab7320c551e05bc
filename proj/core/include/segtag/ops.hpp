#ifndef SEGTAG_OPS_HPP_
#define SEGTAG_OPS_HPP_

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "segtag/tape.hpp"

namespace segtag {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Max-shifted log(sum(exp(x))); -inf for an empty or all -inf input.
double StableLogSumExp(std::span<const double> x);

enum class Activation { kSigmoid, kTanh, kRelu };

Activation ParseActivation(std::string_view name);
std::string_view ActivationName(Activation act);

// Primitive differentiable operations. All operate on rank <= 2 tensors with
// the matrix view of Tensor; elementwise ops require equal shapes, except
// that either operand may be a single-element scalar.

Var MatMul(Var a, Var b);    // a[m x k] * b[k x n]
Var MatMulBT(Var a, Var b);  // a[m x k] * b[n x k]^T

Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double factor);

Var Sigmoid(Var x);
Var Tanh(Var x);
Var Relu(Var x);
Var Apply(Activation act, Var x);

// Adds vector v (length cols) to every row of m. This is the only
// non-scalar broadcast, spelled out as its own primitive.
Var AddRowwise(Var m, Var v);

inline constexpr int kAllAxes = -1;
// axis 0 reduces over rows (one value per column), axis 1 over columns (one
// value per row), kAllAxes to a scalar. -inf entries act as the additive
// identity; an all -inf slice yields -inf with zero gradient.
Var LogSumExp(Var x, int axis);

Var Sum(Var x);

Var SliceRows(Var x, std::size_t begin, std::size_t end);
Var SliceCols(Var x, std::size_t begin, std::size_t end);
Var ConcatRows(std::span<const Var> parts);
Var ConcatCols(std::span<const Var> parts);

// out.row(i) = sum of table rows listed in rows[i] (an empty list gives a
// zero row). Equivalent to multiplying a multi-hot matrix by `table`.
Var GatherRowSums(Var table, const std::vector<std::vector<std::size_t>>& rows);

// x has `groups * width` columns laid out as consecutive blocks of `width`.
// For every row and every coordinate j < width, the `groups` entries
// x[:, g*width + j] are replaced by their softmax.
Var GroupSoftmax(Var x, std::size_t groups);

// Standard LSTM cell on a batch of rows. `pre` holds the gate
// pre-activations [i | f | g | o] (n x 4H); `c_prev` is n x H or an invalid
// Var for a zero initial state. Returns n x 2H laid out as [h | c].
Var LstmCell(Var pre, Var c_prev);

}  // namespace segtag

#endif  // SEGTAG_OPS_HPP_
