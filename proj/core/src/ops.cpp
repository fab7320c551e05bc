#include "segtag/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace segtag {

namespace {

std::string Pair(const Tensor& a, const Tensor& b) {
  return ShapeString(a.shape()) + " and " + ShapeString(b.shape());
}

void AddInto(Tensor* dst, std::span<const double> src) {
  if (!dst) return;
  auto d = dst->data();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] += src[i];
}

double SigmoidValue(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Shape bookkeeping shared by the binary elementwise ops.
struct Broadcast {
  bool a_scalar = false;
  bool b_scalar = false;
  Shape shape;
};

Broadcast CheckElementwise(const char* op, const Tensor& a, const Tensor& b) {
  Broadcast bc;
  if (a.shape() == b.shape() || (SameShape(a, b) && a.size() == b.size())) {
    bc.shape = a.rank() >= b.rank() ? a.shape() : b.shape();
  } else if (b.size() == 1) {
    bc.b_scalar = true;
    bc.shape = a.shape();
  } else if (a.size() == 1) {
    bc.a_scalar = true;
    bc.shape = b.shape();
  } else {
    throw DimensionError(std::string(op) + ": shape mismatch " + Pair(a, b));
  }
  return bc;
}

enum class BinaryOp { kAdd, kSub, kMul };

Var Binary(BinaryOp op, Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const char* name = op == BinaryOp::kAdd ? "add" : op == BinaryOp::kSub ? "sub" : "mul";
  const Broadcast bc = CheckElementwise(name, av, bv);
  Tensor out(bc.shape);
  auto o = out.data();
  auto ad = av.data();
  auto bd = bv.data();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double x = ad[bc.a_scalar ? 0 : i];
    const double y = bd[bc.b_scalar ? 0 : i];
    o[i] = op == BinaryOp::kAdd ? x + y : op == BinaryOp::kSub ? x - y : x * y;
  }
  return a.tape().Record(std::move(out), {a, b}, [a, b, op, bc](Tape& tape, const Tensor& g) {
    auto gd = g.data();
    if (Tensor* ga = tape.GradOf(a)) {
      auto dst = ga->data();
      auto bd = b.value().data();
      for (std::size_t i = 0; i < gd.size(); ++i) {
        double v = gd[i];
        if (op == BinaryOp::kMul) v *= bd[bc.b_scalar ? 0 : i];
        dst[bc.a_scalar ? 0 : i] += v;
      }
    }
    if (Tensor* gb = tape.GradOf(b)) {
      auto dst = gb->data();
      auto ad = a.value().data();
      for (std::size_t i = 0; i < gd.size(); ++i) {
        double v = gd[i];
        if (op == BinaryOp::kSub) v = -v;
        if (op == BinaryOp::kMul) v *= ad[bc.a_scalar ? 0 : i];
        dst[bc.b_scalar ? 0 : i] += v;
      }
    }
  });
}

}  // namespace

double StableLogSumExp(std::span<const double> x) {
  double m = kNegInf;
  for (double v : x) m = std::max(m, v);
  if (m == kNegInf) return kNegInf;
  // The shift and the final log are combined in extended precision so the
  // result is rounded once.
  long double s = 0.0L;
  for (double v : x) s += std::exp(static_cast<long double>(v) - m);
  return static_cast<double>(m + std::log(s));
}

Activation ParseActivation(std::string_view name) {
  if (name == "sigmoid") return Activation::kSigmoid;
  if (name == "tanh") return Activation::kTanh;
  if (name == "relu") return Activation::kRelu;
  throw std::invalid_argument("unknown nonlinearity: " + std::string(name));
}

std::string_view ActivationName(Activation act) {
  switch (act) {
    case Activation::kSigmoid: return "sigmoid";
    case Activation::kTanh: return "tanh";
    case Activation::kRelu: return "relu";
  }
  return "?";
}

Var MatMul(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows() || bv.rank() != 2) {
    throw DimensionError("matmul: inner dimensions differ for " + Pair(av, bv));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  Tensor out(Shape{m, n});
  kernels::MatMul(av.data(), bv.data(), out.data(), m, k, n, false);
  return a.tape().Record(std::move(out), {a, b}, [a, b, m, k, n](Tape& tape, const Tensor& g) {
    if (Tensor* ga = tape.GradOf(a)) {
      kernels::MatMulBT(g.data(), b.value().data(), ga->data(), m, n, k, true);
    }
    if (Tensor* gb = tape.GradOf(b)) {
      kernels::MatMulAT(a.value().data(), g.data(), gb->data(), m, k, n, true);
    }
  });
}

Var MatMulBT(Var a, Var b) {
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.cols() || bv.rank() != 2) {
    throw DimensionError("matmul_bt: inner dimensions differ for " + Pair(av, bv));
  }
  const std::size_t m = av.rows(), k = av.cols(), n = bv.rows();
  Tensor out(Shape{m, n});
  kernels::MatMulBT(av.data(), bv.data(), out.data(), m, k, n, false);
  return a.tape().Record(std::move(out), {a, b}, [a, b, m, k, n](Tape& tape, const Tensor& g) {
    if (Tensor* ga = tape.GradOf(a)) {
      // da[m x k] += g[m x n] * b[n x k]
      kernels::MatMul(g.data(), b.value().data(), ga->data(), m, n, k, true);
    }
    if (Tensor* gb = tape.GradOf(b)) {
      // db[n x k] += g^T[n x m] * a[m x k]
      kernels::MatMulAT(g.data(), a.value().data(), gb->data(), m, n, k, true);
    }
  });
}

Var Add(Var a, Var b) { return Binary(BinaryOp::kAdd, a, b); }
Var Sub(Var a, Var b) { return Binary(BinaryOp::kSub, a, b); }
Var Mul(Var a, Var b) { return Binary(BinaryOp::kMul, a, b); }

Var Scale(Var a, double factor) {
  Tensor out = a.value();
  for (double& v : out.data()) v *= factor;
  return a.tape().Record(std::move(out), {a}, [a, factor](Tape& tape, const Tensor& g) {
    if (Tensor* ga = tape.GradOf(a)) {
      auto dst = ga->data();
      auto gd = g.data();
      for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += factor * gd[i];
    }
  });
}

Var Apply(Activation act, Var x) {
  Tensor out = x.value();
  for (double& v : out.data()) {
    switch (act) {
      case Activation::kSigmoid: v = SigmoidValue(v); break;
      case Activation::kTanh: v = std::tanh(v); break;
      case Activation::kRelu: v = v > 0.0 ? v : 0.0; break;
    }
  }
  Tape& tape = x.tape();
  const std::size_t out_id = tape.size();
  return tape.Record(std::move(out), {x}, [x, act, out_id](Tape& tape, const Tensor& g) {
    Tensor* gx = tape.GradOf(x);
    if (!gx) return;
    auto dst = gx->data();
    auto y = tape.value(out_id).data();
    auto in = x.value().data();
    auto gd = g.data();
    for (std::size_t i = 0; i < dst.size(); ++i) {
      double d = 0.0;
      switch (act) {
        case Activation::kSigmoid: d = y[i] * (1.0 - y[i]); break;
        case Activation::kTanh: d = 1.0 - y[i] * y[i]; break;
        case Activation::kRelu: d = in[i] > 0.0 ? 1.0 : 0.0; break;
      }
      dst[i] += gd[i] * d;
    }
  });
}

Var Sigmoid(Var x) { return Apply(Activation::kSigmoid, x); }
Var Tanh(Var x) { return Apply(Activation::kTanh, x); }
Var Relu(Var x) { return Apply(Activation::kRelu, x); }

Var AddRowwise(Var m, Var v) {
  const Tensor& mv = m.value();
  const Tensor& vv = v.value();
  if (vv.size() != mv.cols()) {
    throw DimensionError("add_rowwise: vector " + ShapeString(vv.shape()) +
                         " does not match columns of " + ShapeString(mv.shape()));
  }
  Tensor out = mv;
  const std::size_t rows = mv.rows(), cols = mv.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = out.row(r);
    for (std::size_t c = 0; c < cols; ++c) row[c] += vv[c];
  }
  return m.tape().Record(std::move(out), {m, v}, [m, v, rows, cols](Tape& tape, const Tensor& g) {
    AddInto(tape.GradOf(m), g.data());
    if (Tensor* gv = tape.GradOf(v)) {
      for (std::size_t r = 0; r < rows; ++r) {
        auto row = g.row(r);
        for (std::size_t c = 0; c < cols; ++c) (*gv)[c] += row[c];
      }
    }
  });
}

Var LogSumExp(Var x, int axis) {
  const Tensor& xv = x.value();
  const std::size_t rows = xv.rows(), cols = xv.cols();
  if (axis != 0 && axis != 1 && axis != kAllAxes) {
    throw DimensionError("logsumexp: axis must be 0, 1 or all, got " + std::to_string(axis));
  }
  // For each output slot, the list of flat input indices reduced into it.
  std::size_t n_out = axis == kAllAxes ? 1 : axis == 0 ? cols : rows;
  std::size_t n_in = axis == kAllAxes ? rows * cols : axis == 0 ? rows : cols;
  auto index = [rows, cols, axis](std::size_t o, std::size_t i) -> std::size_t {
    (void)rows;
    if (axis == kAllAxes) return i;
    return axis == 0 ? i * cols + o : o * cols + i;
  };
  Tensor out = axis == kAllAxes ? Tensor::Scalar(0.0) : Tensor(Shape{n_out});
  std::vector<double> slice(n_in);
  for (std::size_t o = 0; o < n_out; ++o) {
    for (std::size_t i = 0; i < n_in; ++i) slice[i] = xv[index(o, i)];
    out[o] = StableLogSumExp(slice);
  }
  Tape& tape = x.tape();
  const std::size_t out_id = tape.size();
  return tape.Record(std::move(out), {x},
                     [x, n_out, n_in, index, out_id](Tape& tape, const Tensor& g) {
    Tensor* gx = tape.GradOf(x);
    if (!gx) return;
    const Tensor& xv = x.value();
    const Tensor& y = tape.value(out_id);
    for (std::size_t o = 0; o < n_out; ++o) {
      if (y[o] == kNegInf) continue;
      for (std::size_t i = 0; i < n_in; ++i) {
        const std::size_t at = index(o, i);
        (*gx)[at] += g[o] * std::exp(xv[at] - y[o]);
      }
    }
  });
}

Var Sum(Var x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  return x.tape().Record(Tensor::Scalar(total), {x}, [x](Tape& tape, const Tensor& g) {
    if (Tensor* gx = tape.GradOf(x)) {
      for (double& v : gx->data()) v += g[0];
    }
  });
}

Var SliceRows(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  if (begin >= end || end > xv.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of range for " + ShapeString(xv.shape()));
  }
  const std::size_t cols = xv.cols();
  Tensor out(Shape{end - begin, cols});
  std::copy(xv.data().begin() + begin * cols, xv.data().begin() + end * cols,
            out.data().begin());
  return x.tape().Record(std::move(out), {x}, [x, begin, cols](Tape& tape, const Tensor& g) {
    if (Tensor* gx = tape.GradOf(x)) {
      auto dst = gx->data().subspan(begin * cols, g.size());
      auto gd = g.data();
      for (std::size_t i = 0; i < gd.size(); ++i) dst[i] += gd[i];
    }
  });
}

Var SliceCols(Var x, std::size_t begin, std::size_t end) {
  const Tensor& xv = x.value();
  if (begin >= end || end > xv.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") out of range for " + ShapeString(xv.shape()));
  }
  const std::size_t rows = xv.rows(), width = end - begin;
  Tensor out(Shape{rows, width});
  for (std::size_t r = 0; r < rows; ++r) {
    auto src = xv.row(r);
    std::copy(src.begin() + begin, src.begin() + end, out.row(r).begin());
  }
  return x.tape().Record(std::move(out), {x}, [x, begin, rows, width](Tape& tape, const Tensor& g) {
    if (Tensor* gx = tape.GradOf(x)) {
      for (std::size_t r = 0; r < rows; ++r) {
        auto dst = gx->row(r);
        auto src = g.row(r);
        for (std::size_t c = 0; c < width; ++c) dst[begin + c] += src[c];
      }
    }
  });
}

Var ConcatRows(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_rows: no operands");
  const std::size_t cols = parts[0].cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    if (p.cols() != cols) {
      throw DimensionError("concat_rows: column mismatch " +
                           Pair(parts[0].value(), p.value()));
    }
    rows += p.rows();
  }
  Tensor out(Shape{rows, cols});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    auto src = p.value().data();
    std::copy(src.begin(), src.end(), out.data().begin() + offset);
    offset += src.size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().Record(std::move(out), parts, [inputs](Tape& tape, const Tensor& g) {
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      const std::size_t n = p.value().size();
      AddInto(tape.GradOf(p), g.data().subspan(offset, n));
      offset += n;
    }
  });
}

Var ConcatCols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no operands");
  const std::size_t rows = parts[0].rows();
  std::size_t cols = 0;
  for (const Var& p : parts) {
    if (p.rows() != rows) {
      throw DimensionError("concat_cols: row mismatch " + Pair(parts[0].value(), p.value()));
    }
    cols += p.cols();
  }
  Tensor out(Shape{rows, cols});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& pv = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      auto src = pv.row(r);
      std::copy(src.begin(), src.end(), out.row(r).begin() + offset);
    }
    offset += pv.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return parts[0].tape().Record(std::move(out), parts, [inputs, rows](Tape& tape, const Tensor& g) {
    std::size_t offset = 0;
    for (const Var& p : inputs) {
      const std::size_t width = p.cols();
      if (Tensor* gp = tape.GradOf(p)) {
        for (std::size_t r = 0; r < rows; ++r) {
          auto dst = gp->row(r);
          auto src = g.row(r);
          for (std::size_t c = 0; c < width; ++c) dst[c] += src[offset + c];
        }
      }
      offset += width;
    }
  });
}

Var GatherRowSums(Var table, const std::vector<std::vector<std::size_t>>& rows) {
  const Tensor& tv = table.value();
  if (rows.empty()) throw DimensionError("gather_row_sums: no rows requested");
  const std::size_t width = tv.cols();
  Tensor out(Shape{rows.size(), width});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto dst = out.row(r);
    for (std::size_t idx : rows[r]) {
      if (idx >= tv.rows()) {
        throw DimensionError("gather_row_sums: row " + std::to_string(idx) +
                             " outside " + ShapeString(tv.shape()));
      }
      auto src = tv.row(idx);
      for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
    }
  }
  return table.tape().Record(std::move(out), {table}, [table, rows, width](Tape& tape, const Tensor& g) {
    Tensor* gt = tape.GradOf(table);
    if (!gt) return;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      auto src = g.row(r);
      for (std::size_t idx : rows[r]) {
        auto dst = gt->row(idx);
        for (std::size_t c = 0; c < width; ++c) dst[c] += src[c];
      }
    }
  });
}

Var GroupSoftmax(Var x, std::size_t groups) {
  const Tensor& xv = x.value();
  if (groups == 0 || xv.cols() % groups != 0) {
    throw DimensionError("group_softmax: " + std::to_string(xv.cols()) +
                         " columns not divisible into " + std::to_string(groups) + " groups");
  }
  const std::size_t rows = xv.rows(), width = xv.cols() / groups;
  Tensor out(xv.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    auto in = xv.row(r);
    auto o = out.row(r);
    for (std::size_t j = 0; j < width; ++j) {
      double m = kNegInf;
      for (std::size_t k = 0; k < groups; ++k) m = std::max(m, in[k * width + j]);
      double s = 0.0;
      for (std::size_t k = 0; k < groups; ++k) {
        o[k * width + j] = std::exp(in[k * width + j] - m);
        s += o[k * width + j];
      }
      for (std::size_t k = 0; k < groups; ++k) o[k * width + j] /= s;
    }
  }
  Tape& tape = x.tape();
  const std::size_t out_id = tape.size();
  return tape.Record(std::move(out), {x}, [x, rows, width, groups, out_id](Tape& tape, const Tensor& g) {
    Tensor* gx = tape.GradOf(x);
    if (!gx) return;
    const Tensor& y = tape.value(out_id);
    for (std::size_t r = 0; r < rows; ++r) {
      auto yr = y.row(r);
      auto gr = g.row(r);
      auto dst = gx->row(r);
      for (std::size_t j = 0; j < width; ++j) {
        double dot = 0.0;
        for (std::size_t k = 0; k < groups; ++k) dot += gr[k * width + j] * yr[k * width + j];
        for (std::size_t k = 0; k < groups; ++k) {
          const std::size_t at = k * width + j;
          dst[at] += yr[at] * (gr[at] - dot);
        }
      }
    }
  });
}

Var LstmCell(Var pre, Var c_prev) {
  const Tensor& pv = pre.value();
  if (pv.cols() % 4 != 0) {
    throw DimensionError("lstm_cell: gate width " + std::to_string(pv.cols()) +
                         " is not a multiple of 4");
  }
  const std::size_t n = pv.rows(), hidden = pv.cols() / 4;
  const bool has_prev = c_prev.valid();
  if (has_prev && (c_prev.rows() != n || c_prev.cols() != hidden)) {
    throw DimensionError("lstm_cell: cell state " + ShapeString(c_prev.value().shape()) +
                         " does not match gates " + ShapeString(pv.shape()));
  }
  // Activated gates are kept for the backward pass.
  Tensor gates(Shape{n, 4 * hidden});
  Tensor out(Shape{n, 2 * hidden});
  for (std::size_t r = 0; r < n; ++r) {
    auto p = pv.row(r);
    auto a = gates.row(r);
    auto o = out.row(r);
    for (std::size_t j = 0; j < hidden; ++j) {
      const double ig = SigmoidValue(p[j]);
      const double fg = SigmoidValue(p[hidden + j]);
      const double gg = std::tanh(p[2 * hidden + j]);
      const double og = SigmoidValue(p[3 * hidden + j]);
      a[j] = ig;
      a[hidden + j] = fg;
      a[2 * hidden + j] = gg;
      a[3 * hidden + j] = og;
      double c = ig * gg;
      if (has_prev) c = fg * c_prev.value().at(r, j) + c;
      o[hidden + j] = c;
      o[j] = og * std::tanh(c);
    }
  }
  std::vector<Var> inputs{pre};
  if (has_prev) inputs.push_back(c_prev);
  Tape& tape = pre.tape();
  const std::size_t out_id = tape.size();
  return tape.Record(std::move(out), inputs,
                     [pre, c_prev, has_prev, n, hidden, out_id,
                      gates = std::move(gates)](Tape& tape, const Tensor& g) {
    const Tensor& y = tape.value(out_id);
    Tensor* gp = tape.GradOf(pre);
    Tensor* gc = has_prev ? tape.GradOf(c_prev) : nullptr;
    for (std::size_t r = 0; r < n; ++r) {
      auto a = gates.row(r);
      auto yr = y.row(r);
      auto gr = g.row(r);
      for (std::size_t j = 0; j < hidden; ++j) {
        const double ig = a[j], fg = a[hidden + j], gg = a[2 * hidden + j], og = a[3 * hidden + j];
        const double c = yr[hidden + j];
        const double tc = std::tanh(c);
        const double dh = gr[j];
        const double dc = gr[hidden + j] + dh * og * (1.0 - tc * tc);
        const double cp = has_prev ? c_prev.value().at(r, j) : 0.0;
        if (gp) {
          auto dst = gp->row(r);
          dst[j] += dc * gg * ig * (1.0 - ig);
          dst[hidden + j] += has_prev ? dc * cp * fg * (1.0 - fg) : 0.0;
          dst[2 * hidden + j] += dc * ig * (1.0 - gg * gg);
          dst[3 * hidden + j] += dh * tc * og * (1.0 - og);
        }
        if (gc) gc->at(r, j) += dc * fg;
      }
    }
  });
}

}  // namespace segtag
