#include "segtag/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace segtag {

namespace {

std::size_t Product(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void CheckExtents(const Shape& shape) {
  if (shape.size() > 2) {
    throw DimensionError("tensor rank " + std::to_string(shape.size()) +
                         " not supported: " + ShapeString(shape));
  }
  for (std::size_t extent : shape) {
    if (extent == 0) {
      throw DimensionError("tensor extents must be positive: " + ShapeString(shape));
    }
  }
}

}  // namespace

std::string ShapeString(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << 'x';
    out << shape[i];
  }
  out << ']';
  return out.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)) {
  CheckExtents(shape_);
  data_.assign(Product(shape_), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  CheckExtents(shape_);
  if (data_.size() != Product(shape_)) {
    throw DimensionError("data length " + std::to_string(data_.size()) +
                         " does not match shape " + ShapeString(shape_));
  }
}

Tensor Tensor::Vector(std::initializer_list<double> values) {
  return Tensor(Shape{values.size()}, std::vector<double>(values));
}

Tensor Tensor::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> data;
  data.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw DimensionError("ragged matrix literal");
    data.insert(data.end(), row.begin(), row.end());
  }
  return Tensor(Shape{r, c}, std::move(data));
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ContractError("item() on non-scalar tensor " + ShapeString(shape_));
  }
  return data_[0];
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

bool SameShape(const Tensor& a, const Tensor& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a.size() == b.size();
}

namespace kernels {

namespace {

// Rows of `out` are produced four at a time so each row of b is loaded once
// per block. Every element still sums its k terms in ascending order, so
// the blocking never changes a result.
[[gnu::target_clones("avx2", "default")]]
void RowBlock(const double* __restrict a, const double* __restrict b, double* __restrict out,
              std::size_t m, std::size_t k, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const double* a0 = a + i * k;
    const double* a1 = a0 + k;
    const double* a2 = a1 + k;
    const double* a3 = a2 + k;
    double* o0 = out + i * n;
    double* o1 = o0 + n;
    double* o2 = o1 + n;
    double* o3 = o2 + n;
    for (std::size_t p = 0; p < k; ++p) {
      const double s0 = a0[p], s1 = a1[p], s2 = a2[p], s3 = a3[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        const double v = bp[j];
        o0[j] += s0 * v;
        o1[j] += s1 * v;
        o2[j] += s2 * v;
        o3[j] += s3 * v;
      }
    }
  }
  for (; i < m; ++i) {
    const double* ai = a + i * k;
    double* o = out + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = ai[p];
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += s * bp[j];
    }
  }
}

// out = a * b from zeros, or out += a * b where the product is formed
// separately first, so "accumulate" adds one finished sum per element.
void Product(const double* a, const double* b, double* out, std::size_t m, std::size_t k,
             std::size_t n, bool accumulate) {
  if (!accumulate) {
    std::fill(out, out + m * n, 0.0);
    RowBlock(a, b, out, m, k, n);
    return;
  }
  thread_local std::vector<double> scratch;
  scratch.assign(m * n, 0.0);
  RowBlock(a, b, scratch.data(), m, k, n);
  for (std::size_t i = 0; i < m * n; ++i) out[i] += scratch[i];
}

}  // namespace

void MatMul(std::span<const double> a, std::span<const double> b,
            std::span<double> out, std::size_t m, std::size_t k, std::size_t n,
            bool accumulate) {
  Product(a.data(), b.data(), out.data(), m, k, n, accumulate);
}

void MatMulBT(std::span<const double> a, std::span<const double> b,
              std::span<double> out, std::size_t m, std::size_t k,
              std::size_t n, bool accumulate) {
  thread_local std::vector<double> bt;
  bt.resize(k * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < k; ++p) bt[p * n + j] = b[j * k + p];
  }
  Product(a.data(), bt.data(), out.data(), m, k, n, accumulate);
}

void MatMulAT(std::span<const double> a, std::span<const double> b,
              std::span<double> out, std::size_t m, std::size_t k,
              std::size_t n, bool accumulate) {
  thread_local std::vector<double> at;
  at.resize(k * m);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) at[p * m + i] = a[i * k + p];
  }
  Product(at.data(), b.data(), out.data(), k, m, n, accumulate);
}

}  // namespace kernels

}  // namespace segtag
