#include "sgbench/tensor/tape.hpp"

#include "sgbench/core/error.hpp"

namespace sgbench::tensor {

const Tensor& Var::value() const {
  require(tape_ != nullptr, ErrorKind::InvalidArgument, "Var: uninitialized handle");
  return tape_->value(id_);
}

Var Tape::parameter(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = record_;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(Tensor value, std::vector<std::size_t> parents, BackwardFn backward) {
  Node node;
  node.value = std::move(value);
  if (record_) {
    for (std::size_t p : parents) {
      if (nodes_[p].requires_grad) {
        node.requires_grad = true;
        break;
      }
    }
    if (node.requires_grad) {
      node.parents = std::move(parents);
      node.backward = std::move(backward);
    }
  }
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::grad_buffer(std::size_t id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

void Tape::accumulate_grad(std::size_t id, const Tensor& g) {
  if (!nodes_[id].requires_grad) return;
  Tensor& buf = grad_buffer(id);
  require(buf.size() == g.size(), ErrorKind::ShapeMismatch,
          "accumulate_grad: gradient " + shape_string(g.shape()) + " for value " +
              shape_string(buf.shape()));
  double* dst = buf.data();
  const double* src = g.data();
  for (std::size_t i = 0; i < buf.size(); ++i) dst[i] += src[i];
}

void Tape::backward(Var loss) {
  require(loss.tape() == this, ErrorKind::InvalidArgument, "backward: loss belongs to another tape");
  require(nodes_[loss.id()].value.size() == 1, ErrorKind::ShapeMismatch,
          "backward: loss must be scalar, got " + shape_string(nodes_[loss.id()].value.shape()));
  for (auto& n : nodes_) n.grad = Tensor();
  if (!nodes_[loss.id()].requires_grad) return;
  grad_buffer(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.requires_grad || n.grad.empty() || !n.backward) continue;
    n.backward(*this, n.grad);
  }
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_[v.id()];
  if (n.grad.empty()) return Tensor(n.value.shape(), 0.0);
  return n.grad;
}

}  // namespace sgbench::tensor
