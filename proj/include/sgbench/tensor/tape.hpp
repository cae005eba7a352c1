#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "sgbench/tensor/tensor.hpp"

namespace sgbench::tensor {

class Tape;

/// Handle to a value recorded on a Tape. Cheap to copy; valid while the tape lives.
class Var {
public:
  Var() = default;

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }
  std::size_t id() const { return id_; }
  Tape* tape() const { return tape_; }
  bool valid() const { return tape_ != nullptr; }

private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

/// Receives the output gradient and accumulates into parent gradients via
/// Tape::accumulate_grad.
using BackwardFn = std::function<void(Tape&, const Tensor& out_grad)>;

/// Linear record of operations for reverse-mode differentiation.
///
/// Nodes are appended in evaluation order, so parents always precede their
/// children and backward() is a single reverse sweep. A tape constructed with
/// record=false keeps values only; use it for inference.
class Tape {
public:
  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  /// Gradient-tracked leaf (a trainable parameter).
  Var parameter(Tensor value);
  /// Detached leaf.
  Var constant(Tensor value);

  /// Used by ops: appends a node whose gradient flows to `parents`.
  Var record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward);

  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const Tensor& value(std::size_t id) const { return nodes_[id].value; }

  /// Adds g into the gradient buffer of node `id` (allocated lazily).
  void accumulate_grad(std::size_t id, const Tensor& g);
  /// Mutable gradient buffer, zero-initialized on first access.
  Tensor& grad_buffer(std::size_t id);

  /// Reverse sweep from a scalar loss. Throws ShapeMismatch for non-scalar losses.
  void backward(Var loss);

  /// Gradient of the last backward() w.r.t. v; zeros if v was not reached.
  Tensor grad(Var v) const;

  std::size_t size() const { return nodes_.size(); }

private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::vector<std::size_t> parents;
    BackwardFn backward;
  };

  bool record_;
  std::vector<Node> nodes_;
};

}  // namespace sgbench::tensor
