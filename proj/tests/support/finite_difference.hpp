#pragma once

// Test-only oracles: central finite differences and relative error.

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "spot/autodiff/tensor.hpp"

namespace spot::testing {

using autodiff::Tensor;

// d loss / d params by central differences, perturbing each entry in place.
inline std::vector<Tensor> central_difference(
    std::vector<Tensor>& params, const std::function<double()>& loss,
    double step = 1e-5) {
  std::vector<Tensor> grads;
  for (Tensor& p : params) {
    Tensor g(p.shape());
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double saved = p[i];
      p[i] = saved + step;
      const double up = loss();
      p[i] = saved - step;
      const double down = loss();
      p[i] = saved;
      g[i] = (up - down) / (2.0 * step);
    }
    grads.push_back(std::move(g));
  }
  return grads;
}

// ||a - b|| / max(||a||, ||b||) over all entries of all tensors.
inline double relative_error(const std::vector<Tensor>& a,
                             const std::vector<Tensor>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t) {
    for (std::size_t i = 0; i < a[t].size(); ++i) {
      const double d = a[t][i] - b[t][i];
      diff += d * d;
      na += a[t][i] * a[t][i];
      nb += b[t][i] * b[t][i];
    }
  }
  const double denom = std::max({std::sqrt(na), std::sqrt(nb), 1e-12});
  return std::sqrt(diff) / denom;
}

}  // namespace spot::testing
