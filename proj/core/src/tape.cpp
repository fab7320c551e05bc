#include "segtag/tape.hpp"

#include <stdexcept>

#include "segtag/rng.hpp"

namespace segtag {

ParamId ParameterStore::Add(std::string name, Tensor init) {
  for (const auto& existing : names_) {
    if (existing == name) throw ContractError("duplicate parameter name: " + name);
  }
  names_.push_back(std::move(name));
  values_.push_back(std::move(init));
  return ParamId{values_.size() - 1};
}

ParamId ParameterStore::Find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return ParamId{i};
  }
  throw std::out_of_range("no parameter named " + std::string(name));
}

ParamId ParamBinder::Bind(const std::string& name, const Shape& shape) {
  ParamId id;
  try {
    id = store_.Find(name);
  } catch (const std::out_of_range&) {
    throw ContractError("parameter " + name + " missing from store");
  }
  if (store_.value(id).shape() != shape) {
    throw DimensionError("parameter " + name + " has shape " +
                         ShapeString(store_.value(id).shape()) + ", expected " +
                         ShapeString(shape));
  }
  return id;
}

ParamId ParamBinder::Uniform(const std::string& name, Shape shape) {
  if (!init_) return Bind(name, shape);
  Tensor t(shape);
  for (double& v : t.data()) v = init_->Uniform(-scale_, scale_);
  return store_.Add(name, std::move(t));
}

ParamId ParamBinder::Filled(const std::string& name, Shape shape, double value) {
  if (!init_) return Bind(name, shape);
  return store_.Add(name, Tensor(std::move(shape), value));
}

ParamId ParamBinder::UniformWithBand(const std::string& name, Shape shape, std::size_t begin,
                                     std::size_t end, double value) {
  if (!init_) return Bind(name, shape);
  Tensor t(shape);
  const std::size_t cols = t.cols();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const std::size_t c = i % cols;
    t[i] = (c >= begin && c < end) ? value : init_->Uniform(-scale_, scale_);
  }
  return store_.Add(name, std::move(t));
}

Gradients::Gradients(const ParameterStore& store) {
  grads_.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    grads_.emplace_back(store.value(ParamId{i}).shape());
  }
}

Gradients& Gradients::operator+=(const Gradients& other) {
  if (other.grads_.size() != grads_.size()) {
    throw DimensionError("gradient maps of different parameter stores");
  }
  for (std::size_t i = 0; i < grads_.size(); ++i) {
    auto dst = grads_[i].data();
    auto src = other.grads_[i].data();
    for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
  }
  return *this;
}

void Gradients::Scale(double factor) {
  for (auto& g : grads_) {
    for (double& v : g.data()) v *= factor;
  }
}

double Gradients::SquaredNorm() const {
  double total = 0.0;
  for (const auto& g : grads_) {
    for (double v : g.data()) total += v * v;
  }
  return total;
}

bool Gradients::AllFinite() const {
  for (const auto& g : grads_) {
    if (!g.AllFinite()) return false;
  }
  return true;
}

const Tensor& Var::value() const { return tape_->value(id_); }

Var Tape::Constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::Param(const ParameterStore& store, ParamId id) {
  Node node;
  node.external = &store.value(id);
  node.needs_grad = true;
  node.store = &store;
  node.param = id;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::Record(Tensor value, std::span<const Var> inputs, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  for (const Var& in : inputs) {
    if (&in.tape() != this) throw ContractError("operand recorded on a different tape");
    if (nodes_[in.id()].needs_grad) node.needs_grad = true;
  }
  if (node.needs_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor& Tape::value(std::size_t id) const {
  const Node& node = nodes_[id];
  return node.external ? *node.external : node.value;
}

Tensor* Tape::GradOf(Var v) {
  Node& node = nodes_[v.id()];
  if (!node.needs_grad) return nullptr;
  if (!node.has_grad) {
    node.grad = Tensor(value(v.id()).shape());
    node.has_grad = true;
  }
  return &node.grad;
}

Gradients Tape::Backward(Var loss, const ParameterStore& store) {
  if (&loss.tape() != this) throw ContractError("loss recorded on a different tape");
  if (loss.value().size() != 1) {
    throw ContractError("backward needs a scalar loss, got shape " +
                        ShapeString(loss.value().shape()));
  }
  Gradients grads(store);
  if (!nodes_[loss.id()].needs_grad) return grads;
  GradOf(loss)->Fill(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad) continue;
    // Inputs always precede their consumer, so the closure only touches
    // gradient buffers of earlier nodes.
    if (node.backward) node.backward(*this, node.grad);
    if (node.store == &store) {
      auto dst = grads[node.param].data();
      auto src = node.grad.data();
      for (std::size_t j = 0; j < dst.size(); ++j) dst[j] += src[j];
    }
  }
  return grads;
}

}  // namespace segtag
