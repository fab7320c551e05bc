#ifndef SEGTAG_TAPE_HPP_
#define SEGTAG_TAPE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "segtag/tensor.hpp"

namespace segtag {

// Index of a named parameter inside a ParameterStore.
struct ParamId {
  std::size_t index = 0;
  friend bool operator==(ParamId, ParamId) = default;
};

// Ordered collection of named parameter tensors. Insertion order is the
// serialization order, so ids are stable across save/load.
class ParameterStore {
 public:
  ParamId Add(std::string name, Tensor init);

  Tensor& value(ParamId id) { return values_[id.index]; }
  const Tensor& value(ParamId id) const { return values_[id.index]; }
  const std::string& name(ParamId id) const { return names_[id.index]; }
  std::size_t size() const { return values_.size(); }
  // Throws std::out_of_range for unknown names.
  ParamId Find(std::string_view name) const;

  friend bool operator==(const ParameterStore&, const ParameterStore&) = default;

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> values_;
};

class Rng;

// Creates parameters in a store (initialize mode) or resolves them by name
// with a shape check (bind mode, used after loading a checkpoint).
class ParamBinder {
 public:
  ParamBinder(ParameterStore& store, Rng* init, double init_scale)
      : store_(store), init_(init), scale_(init_scale) {}

  // Uniform in [-init_scale, init_scale].
  ParamId Uniform(const std::string& name, Shape shape);
  ParamId Filled(const std::string& name, Shape shape, double value);
  // Uniform, except columns [begin, end) which are set to `value`.
  ParamId UniformWithBand(const std::string& name, Shape shape, std::size_t begin,
                          std::size_t end, double value);

 private:
  ParamId Bind(const std::string& name, const Shape& shape);

  ParameterStore& store_;
  Rng* init_;
  double scale_;
};

// One gradient tensor per parameter of a store, same shapes.
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterStore& store);

  Tensor& operator[](ParamId id) { return grads_[id.index]; }
  const Tensor& operator[](ParamId id) const { return grads_[id.index]; }
  std::size_t size() const { return grads_.size(); }

  Gradients& operator+=(const Gradients& other);
  void Scale(double factor);
  double SquaredNorm() const;
  bool AllFinite() const;

 private:
  std::vector<Tensor> grads_;
};

class Tape;

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape& tape() const { return *tape_; }
  std::size_t id() const { return id_; }
  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Define-by-run reverse-mode tape. One tape per sequence; it is not
// thread-safe, but parameter values are only read through it, so several
// tapes may share one ParameterStore concurrently.
class Tape {
 public:
  // Receives the gradient of the recorded output and accumulates into the
  // gradients of its inputs through GradOf().
  using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var Constant(Tensor value);
  Var Param(const ParameterStore& store, ParamId id);
  // Records the result of a primitive. `backward` may be empty when no input
  // needs a gradient.
  Var Record(Tensor value, std::span<const Var> inputs, BackwardFn backward);
  Var Record(Tensor value, std::initializer_list<Var> inputs, BackwardFn backward) {
    return Record(std::move(value), std::span<const Var>(inputs.begin(), inputs.size()),
                  std::move(backward));
  }

  const Tensor& value(std::size_t id) const;
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  // Gradient buffer of `v`, zero-initialized on first use; nullptr when `v`
  // does not depend on any parameter.
  Tensor* GradOf(Var v);

  // Reverse sweep from a scalar loss. Every parameter of `store` gets an
  // entry; parameters absent from the tape receive zeros.
  Gradients Backward(Var loss, const ParameterStore& store);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    bool has_grad = false;
    bool needs_grad = false;
    const ParameterStore* store = nullptr;
    ParamId param;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
};

}  // namespace segtag

#endif  // SEGTAG_TAPE_HPP_
