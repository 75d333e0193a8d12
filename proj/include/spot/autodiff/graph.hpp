#pragma once

#include <cstddef>
#include <functional>
#include <string_view>
#include <vector>

#include "spot/autodiff/tensor.hpp"

namespace spot::autodiff {

class Graph;

// Handle to a node of a Graph. Cheap to copy; valid while the graph lives.
class Var {
 public:
  Var() = default;
  Var(Graph* graph, std::size_t id) : graph_(graph), id_(id) {}

  Graph& graph() const { return *graph_; }
  std::size_t id() const { return id_; }
  bool valid() const { return graph_ != nullptr; }

  const Tensor& value() const;
  Shape shape() const { return value().shape(); }
  bool requires_grad() const;

 private:
  Graph* graph_ = nullptr;
  std::size_t id_ = 0;
};

// Define-by-run tape. Nodes are appended in construction order, which is a
// topological order; backward walks them in exact reverse.
class Graph {
 public:
  // Propagates the output gradient into the inputs' gradient buffers.
  using BackwardFn = std::function<void(Graph&, const Tensor& out_grad)>;

  Graph() = default;
  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  Var constant(Tensor value);
  Var parameter(Tensor value);
  Var leaf(Tensor value, bool requires_grad);

  // Appends an op node. `backward` is dropped when no input requires grad.
  Var record(std::string_view op, Tensor value,
             std::initializer_list<Var> inputs, BackwardFn backward);

  // Populates gradients of every node reachable from `loss` (a 1 x 1 node).
  void backward(Var loss);

  // d loss / d v. Zeros for nodes the loss does not depend on.
  Tensor grad(Var v) const;
  std::vector<Tensor> grads(const std::vector<Var>& vars) const;

  const Tensor& value(Var v) const { return nodes_[v.id()].value; }
  bool requires_grad(Var v) const { return nodes_[v.id()].requires_grad; }
  std::size_t size() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

  // Drops all nodes; the graph can then be rebuilt and differentiated again.
  void clear();

  // Gradient buffer of node `id`, zero-initialised on first access. Used by
  // op backward functions.
  Tensor& grad_buffer(std::size_t id);

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace spot::autodiff
