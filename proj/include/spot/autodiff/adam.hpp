#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "spot/autodiff/tensor.hpp"

namespace spot::autodiff {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::int64_t step = 0;

  static AdamState zeros_like(std::span<const Tensor> params);
  bool operator==(const AdamState&) const = default;
};

// One bias-corrected Adam update of `params` in place.
void adam_step(std::span<Tensor> params, std::span<const Tensor> grads,
               AdamState& state, const AdamConfig& config);

}  // namespace spot::autodiff
