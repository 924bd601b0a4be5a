#ifndef FORECLASSNET_TENSOR_HPP
#define FORECLASSNET_TENSOR_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "foreclassnet/errors.hpp"

namespace fcn {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& s) {
  std::size_t n = 1;
  for (std::size_t d : s) n *= d;
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

/// Persistent, named parameter storage. Lives outside any tape; gradients
/// accumulate here across backward passes until zero_grad.
struct Parameter {
  std::string name;
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string n, Shape s, bool train = true)
      : name(std::move(n)),
        shape(std::move(s)),
        value(numel(shape), 0.0),
        grad(numel(shape), 0.0),
        trainable(train) {}

  std::size_t size() const { return value.size(); }
  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

class Tape;

/// Lightweight handle to a node on a Tape. Values are immutable once the node
/// is created; only the gradient slot is written (during backward).
class Tensor {
 public:
  Tensor() = default;

  bool defined() const { return tape_ != nullptr; }
  int id() const { return id_; }
  Tape* tape() const { return tape_; }

  const Shape& shape() const;
  std::size_t size() const;
  std::span<const double> values() const;
  /// Scalar convenience accessor; requires size() == 1.
  double value() const;
  /// Gradient of this node after backward(); zeros if it never received one.
  std::vector<double> grad() const;

 private:
  friend class Tape;
  Tensor(Tape* t, int id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

/// Define-by-run reverse-mode tape over dense float-64 tensors. Rebuilt for
/// every forward pass; single-writer. Nodes are recorded in topological order
/// (inputs always precede the operation that consumes them), and one backward
/// traversal visits each node exactly once, summing gradients into shared
/// inputs.
class Tape {
 public:
  struct Node {
    Shape shape;
    std::vector<double> storage;     // owned values; empty for parameter views
    const double* vals = nullptr;
    std::size_t n = 0;
    std::vector<double> grad;        // allocated on first touch in backward
    Parameter* param = nullptr;
    bool requires_grad = false;
    std::function<void(Tape&, int self)> backward_fn;  // empty for leaves
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t node_count() const { return nodes_.size(); }

  void clear() {
    nodes_.clear();
    differentiated_ = false;
  }

  /// Non-differentiable input.
  Tensor constant(Shape shape, std::vector<double> values) {
    return push(std::move(shape), std::move(values), false, nullptr, {});
  }

  Tensor scalar(double v) { return constant({1}, {v}); }

  /// Differentiable input owned by the tape (e.g. an attacked series).
  Tensor leaf(Shape shape, std::vector<double> values, bool requires_grad = true) {
    return push(std::move(shape), std::move(values), requires_grad, nullptr, {});
  }

  /// View of a parameter's current value. No copy; after backward() the
  /// parameter's grad has been accumulated on the tape node (use
  /// accumulate_param_grads to move it into Parameter::grad or a flat sink).
  Tensor watch(Parameter& p) {
    Node node;
    node.shape = p.shape;
    node.vals = p.value.data();
    node.n = p.value.size();
    node.param = &p;
    node.requires_grad = p.trainable;
    nodes_.push_back(std::move(node));
    return Tensor(this, static_cast<int>(nodes_.size()) - 1);
  }

  /// Records an operation result together with its backward rule.
  Tensor make(Shape shape, std::vector<double> values, bool requires_grad,
              std::function<void(Tape&, int)> backward_fn) {
    if (values.size() != numel(shape))
      throw dimension_error("Tape::make: values/shape mismatch");
    return push(std::move(shape), std::move(values), requires_grad,
                nullptr, std::move(backward_fn));
  }

  const Node& at(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  Node& at(int id) { return nodes_[static_cast<std::size_t>(id)]; }

  std::span<const double> values(int id) const {
    const Node& n = at(id);
    return {n.vals, n.n};
  }

  bool wants_grad(int id) const { return at(id).requires_grad; }

  /// Gradient buffer of a node, allocated (zeroed) on first use.
  std::vector<double>& grad_buf(int id) {
    Node& n = at(id);
    if (n.grad.empty()) n.grad.assign(n.n, 0.0);
    return n.grad;
  }

  bool grad_touched(int id) const { return !at(id).grad.empty(); }

  /// Reverse pass from a scalar loss. Each recorded operation runs its
  /// backward rule exactly once, in reverse topological order. Non-finite
  /// gradients are surfaced as numeric_error rather than stored silently.
  void backward(const Tensor& loss) {
    if (loss.tape() != this)
      throw contract_error("Tape::backward: loss lives on a different tape");
    if (loss.size() != 1)
      throw contract_error("Tape::backward: loss must be a scalar, got shape " +
                           shape_str(loss.shape()));
    if (differentiated_)
      throw contract_error(
          "Tape::backward: tape already differentiated; rebuild the graph");
    differentiated_ = true;
    grad_buf(loss.id())[0] += 1.0;
    for (int id = loss.id(); id >= 0; --id) {
      Node& n = at(id);
      if (!n.backward_fn || !n.requires_grad || n.grad.empty()) continue;
      n.backward_fn(*this, id);
    }
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
      for (double g : nodes_[id].grad) {
        if (!std::isfinite(g))
          throw numeric_error("Tape::backward: non-finite gradient at node " +
                              std::to_string(id));
      }
    }
  }

  /// Adds every watched parameter's tape gradient into Parameter::grad.
  void accumulate_param_grads() {
    for (Node& n : nodes_) {
      if (!n.param || n.grad.empty()) continue;
      for (std::size_t i = 0; i < n.grad.size(); ++i) n.param->grad[i] += n.grad[i];
    }
  }

  /// Same, but into a caller-owned flat buffer (for deterministic
  /// per-worker accumulation). `offset_of` maps a parameter to its offset in
  /// `sink`; parameters not in the map are skipped.
  template <typename OffsetFn>
  void accumulate_param_grads(std::vector<double>& sink, OffsetFn&& offset_of) {
    for (Node& n : nodes_) {
      if (!n.param || n.grad.empty()) continue;
      const auto off = offset_of(n.param);
      if (!off.second) continue;
      double* dst = sink.data() + off.first;
      for (std::size_t i = 0; i < n.grad.size(); ++i) dst[i] += n.grad[i];
    }
  }

 private:
  Tensor push(Shape shape, std::vector<double> values, bool requires_grad,
              Parameter* param, std::function<void(Tape&, int)> backward_fn) {
    Node node;
    node.shape = std::move(shape);
    node.storage = std::move(values);
    node.vals = node.storage.data();
    node.n = node.storage.size();
    node.param = param;
    node.requires_grad = requires_grad;
    node.backward_fn = std::move(backward_fn);
    if (node.n != numel(node.shape))
      throw dimension_error("Tape: values length does not match shape " +
                            shape_str(node.shape));
    nodes_.push_back(std::move(node));
    return Tensor(this, static_cast<int>(nodes_.size()) - 1);
  }

  std::vector<Node> nodes_;
  bool differentiated_ = false;
};

inline const Shape& Tensor::shape() const { return tape_->at(id_).shape; }
inline std::size_t Tensor::size() const { return tape_->at(id_).n; }
inline std::span<const double> Tensor::values() const { return tape_->values(id_); }

inline double Tensor::value() const {
  if (size() != 1)
    throw contract_error("Tensor::value: tensor is not scalar, shape " +
                         shape_str(shape()));
  return values()[0];
}

inline std::vector<double> Tensor::grad() const {
  const Tape::Node& n = tape_->at(id_);
  if (n.grad.empty()) return std::vector<double>(n.n, 0.0);
  return n.grad;
}

inline void zero_grad(std::vector<Parameter*>& params) {
  for (Parameter* p : params) p->zero_grad();
}

}  // namespace fcn

#endif  // FORECLASSNET_TENSOR_HPP
