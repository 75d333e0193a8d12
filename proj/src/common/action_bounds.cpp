#include "spot/action_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "spot/autodiff/ops.hpp"
#include "spot/errors.hpp"

namespace spot {

using autodiff::Tensor;
using autodiff::Var;

Tensor ActionBounds::center_row() const {
  Tensor t(1, dim());
  for (std::size_t i = 0; i < dim(); ++i) t[i] = 0.5 * (high[i] + low[i]);
  return t;
}

Tensor ActionBounds::half_range_row() const {
  Tensor t(1, dim());
  for (std::size_t i = 0; i < dim(); ++i) t[i] = 0.5 * (high[i] - low[i]);
  return t;
}

void ActionBounds::validate() const {
  if (low.size() != high.size() || low.empty()) {
    throw ContractError("action bounds need matching nonempty low/high");
  }
  for (std::size_t i = 0; i < low.size(); ++i) {
    if (!(low[i] < high[i])) {
      throw ContractError("action bound low must be below high");
    }
  }
}

Var squash_to_bounds(Var pre, const ActionBounds& bounds) {
  autodiff::Graph& g = pre.graph();
  return autodiff::tanh(pre) * g.constant(bounds.half_range_row()) +
         g.constant(bounds.center_row());
}

Tensor squash_to_bounds(const Tensor& pre, const ActionBounds& bounds) {
  Tensor out = pre;
  const std::size_t d = bounds.dim();
  for (std::size_t i = 0; i < out.size(); ++i) {
    const std::size_t j = i % d;
    out[i] = std::tanh(pre[i]) * (0.5 * (bounds.high[j] - bounds.low[j])) +
             0.5 * (bounds.high[j] + bounds.low[j]);
  }
  return out;
}

void clip_to_bounds(Tensor& actions, const ActionBounds& bounds) {
  const std::size_t d = bounds.dim();
  for (std::size_t i = 0; i < actions.size(); ++i) {
    const std::size_t j = i % d;
    actions[i] = std::clamp(actions[i], bounds.low[j], bounds.high[j]);
  }
}

}  // namespace spot
