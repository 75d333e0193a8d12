#include "spot/autodiff/graph.hpp"

#include <string>

#include "spot/errors.hpp"

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace spot::autodiff {
namespace {

#ifdef __GLIBC__
// Batch activations are ~128 KiB, right at glibc's default mmap threshold,
// so every per-step tensor would otherwise be mmapped and unmapped.
[[maybe_unused]] const bool kAllocatorTuned = [] {
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  return true;
}();
#endif

}  // namespace

const Tensor& Var::value() const { return graph_->value(*this); }

bool Var::requires_grad() const { return graph_->requires_grad(*this); }

Var Graph::constant(Tensor value) { return leaf(std::move(value), false); }

Var Graph::parameter(Tensor value) { return leaf(std::move(value), true); }

Var Graph::leaf(Tensor value, bool requires_grad) {
  if (!value.all_finite()) {
    throw NumericError("non-finite value in leaf of shape " +
                       to_string(value.shape()));
  }
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(std::string_view op, Tensor value,
                  std::initializer_list<Var> inputs, BackwardFn backward) {
  if (!value.all_finite()) {
    throw NumericError("non-finite output of op '" + std::string(op) + "'");
  }
  Node node;
  node.value = std::move(value);
  for (const Var& in : inputs) {
    if (&in.graph() != this) {
      throw ContractError("op '" + std::string(op) +
                          "' mixes nodes of different graphs");
    }
    node.requires_grad = node.requires_grad || nodes_[in.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor& Graph::grad_buffer(std::size_t id) {
  Node& node = nodes_[id];
  if (!node.has_grad) {
    node.grad = Tensor(node.value.shape(), 0.0);
    node.has_grad = true;
  }
  return node.grad;
}

void Graph::backward(Var loss) {
  if (&loss.graph() != this) {
    throw ContractError("backward on a node of another graph");
  }
  if (backward_done_) {
    throw ContractError("backward called twice on the same graph");
  }
  if (loss.shape() != Shape{1, 1}) {
    throw ContractError("backward requires a scalar loss, got shape " +
                        to_string(loss.shape()));
  }
  backward_done_ = true;
  grad_buffer(loss.id()).fill(1.0);
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    Node& node = nodes_[i];
    if (!node.has_grad || !node.backward) continue;
    // Callbacks only write to input buffers; nodes_ is not resized here.
    node.backward(*this, node.grad);
  }
}

Tensor Graph::grad(Var v) const {
  const Node& node = nodes_[v.id()];
  if (!node.has_grad) return Tensor(node.value.shape(), 0.0);
  return node.grad;
}

std::vector<Tensor> Graph::grads(const std::vector<Var>& vars) const {
  std::vector<Tensor> out;
  out.reserve(vars.size());
  for (const Var& v : vars) out.push_back(grad(v));
  return out;
}

void Graph::clear() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace spot::autodiff
