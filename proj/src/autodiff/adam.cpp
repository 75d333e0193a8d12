#include "spot/autodiff/adam.hpp"

#include <cmath>
#include <string>

#include "spot/errors.hpp"

namespace spot::autodiff {

AdamState AdamState::zeros_like(std::span<const Tensor> params) {
  AdamState state;
  for (const Tensor& p : params) {
    state.m.emplace_back(p.shape(), 0.0);
    state.v.emplace_back(p.shape(), 0.0);
  }
  return state;
}

void adam_step(std::span<Tensor> params, std::span<const Tensor> grads,
               AdamState& state, const AdamConfig& config) {
  if (!(config.lr > 0.0)) throw ConfigError("adam learning rate must be > 0");
  if (params.size() != grads.size() || params.size() != state.m.size()) {
    throw ShapeError("adam: " + std::to_string(params.size()) +
                     " params, " + std::to_string(grads.size()) +
                     " grads, " + std::to_string(state.m.size()) +
                     " moment slots");
  }
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (params[p].shape() != grads[p].shape() ||
        params[p].shape() != state.m[p].shape()) {
      throw ShapeError("adam: param " + std::to_string(p) + " has shape " +
                       to_string(params[p].shape()) + " but grad has " +
                       to_string(grads[p].shape()));
    }
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bias1 = 1.0 - std::pow(config.beta1, t);
  const double bias2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& param = params[p];
    const Tensor& grad = grads[p];
    Tensor& m = state.m[p];
    Tensor& v = state.v[p];
    for (std::size_t i = 0; i < param.size(); ++i) {
      const double g = grad[i];
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      param[i] -= config.lr * m_hat / (std::sqrt(v_hat) + config.eps);
    }
  }
}

}  // namespace spot::autodiff
