#ifndef SEGTAG_TENSOR_HPP_
#define SEGTAG_TENSOR_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace segtag {

using Shape = std::vector<std::size_t>;

// Raised when operand shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A precondition of an operation was violated by the caller.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

std::string ShapeString(const Shape& shape);

// Dense row-major tensor of 64-bit reals. Rank 0 (scalar), 1 and 2 are the
// only ranks the model needs; a rank-1 tensor behaves as a 1 x n row when an
// operation wants a matrix view.
class Tensor {
 public:
  Tensor() : shape_{}, data_(1, 0.0) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  static Tensor Scalar(double value) { return Tensor(Shape{}, {value}); }
  static Tensor Vector(std::initializer_list<double> values);
  static Tensor Matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor Zeros(std::size_t rows, std::size_t cols) {
    return Tensor(Shape{rows, cols});
  }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  // Matrix view: rank 2 -> (shape[0], shape[1]); rank 1 -> (1, n); rank 0 -> (1, 1).
  std::size_t rows() const { return shape_.size() == 2 ? shape_[0] : 1; }
  std::size_t cols() const { return shape_.empty() ? 1 : shape_.back(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& at(std::size_t r, std::size_t c) { return data_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data_[r * cols() + c]; }
  double item() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols(), cols()};
  }

  void Fill(double value);
  bool AllFinite() const;

  friend bool operator==(const Tensor&, const Tensor&) = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

bool SameShape(const Tensor& a, const Tensor& b);

// Deterministic dense kernels. Every output element is accumulated over the
// inner index in ascending order starting from 0.0, so the value of a row
// never depends on how many other rows are computed alongside it.
namespace kernels {

// out[m x n] (+)= a[m x k] * b[k x n]
void MatMul(std::span<const double> a, std::span<const double> b,
            std::span<double> out, std::size_t m, std::size_t k, std::size_t n,
            bool accumulate);
// out[m x n] (+)= a[m x k] * b[n x k]^T
void MatMulBT(std::span<const double> a, std::span<const double> b,
              std::span<double> out, std::size_t m, std::size_t k,
              std::size_t n, bool accumulate);
// out[k x n] (+)= a[m x k]^T * b[m x n]
void MatMulAT(std::span<const double> a, std::span<const double> b,
              std::span<double> out, std::size_t m, std::size_t k,
              std::size_t n, bool accumulate);

}  // namespace kernels

}  // namespace segtag

#endif  // SEGTAG_TENSOR_HPP_
