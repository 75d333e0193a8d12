#pragma once

#include <span>
#include <vector>

#include "spot/autodiff/graph.hpp"
#include "spot/autodiff/tensor.hpp"

namespace spot {

// Per-dimension box [low, high] for actions.
struct ActionBounds {
  std::vector<double> low;
  std::vector<double> high;

  std::size_t dim() const { return low.size(); }
  // [1, dim] rows of (high + low) / 2 and (high - low) / 2.
  autodiff::Tensor center_row() const;
  autodiff::Tensor half_range_row() const;
  // Throws ContractError unless low < high elementwise and sizes match.
  void validate() const;

  bool operator==(const ActionBounds&) const = default;
};

// center + half_range * tanh(pre), applied per column.
autodiff::Var squash_to_bounds(autodiff::Var pre, const ActionBounds& bounds);
autodiff::Tensor squash_to_bounds(const autodiff::Tensor& pre,
                                  const ActionBounds& bounds);
// Clamps each column of `actions` to the box in place.
void clip_to_bounds(autodiff::Tensor& actions, const ActionBounds& bounds);

}  // namespace spot
