#pragma once

// 1-D conditional two-component Gaussian mixture with a known density:
//   s ~ U(-state_range, state_range)
//   a | s ~ 0.5 N(m(s), sigma^2) + 0.5 N(-m(s), sigma^2),  m(s) = offset + slope s

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "spot/autodiff/tensor.hpp"
#include "spot/cvae/cvae.hpp"

namespace spot::testing {

struct MixtureTask {
  double state_range = 1.25;
  double sigma = 1.5;
  double offset = 1.0;
  double slope = 0.5;

  double mode(double s) const { return offset + slope * s; }

  double log_p(double s, double a) const {
    const double m = mode(s);
    const auto log_normal = [&](double mu) {
      const double d = (a - mu) / sigma;
      return -0.5 * d * d - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
    };
    const double x = log_normal(m), y = log_normal(-m);
    const double hi = std::max(x, y);
    return hi + std::log(0.5 * std::exp(x - hi) + 0.5 * std::exp(y - hi));
  }

  // Rows of (s, a).
  std::pair<autodiff::Tensor, autodiff::Tensor> sample(std::size_t n,
                                                       std::mt19937_64& rng) const {
    autodiff::Tensor s(n, 1), a(n, 1);
    std::uniform_real_distribution<double> us(-state_range, state_range);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = us(rng);
      const double m = mode(s[i]);
      a[i] = (coin(rng) ? m : -m) + sigma * normal(rng);
    }
    return {s, a};
  }

  // Differential entropy of a | s by composite Simpson quadrature.
  double conditional_entropy(double s, int intervals = 4000) const {
    const double m = std::abs(mode(s));
    const double lo = -m - 12.0 * sigma, hi = m + 12.0 * sigma;
    const double h = (hi - lo) / intervals;
    double total = 0.0;
    for (int i = 0; i <= intervals; ++i) {
      const double a = lo + i * h;
      const double lp = log_p(s, a);
      const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      total += w * std::exp(lp) * lp;
    }
    return -total * h / 3.0;
  }

  // Integral of p(a | s) over a, again by Simpson; should be 1.
  double total_mass(double s, int intervals = 4000) const {
    const double m = std::abs(mode(s));
    const double lo = -m - 12.0 * sigma, hi = m + 12.0 * sigma;
    const double h = (hi - lo) / intervals;
    double total = 0.0;
    for (int i = 0; i <= intervals; ++i) {
      const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      total += w * std::exp(log_p(s, lo + i * h));
    }
    return total * h / 3.0;
  }
};

// 10 x 10 grid: s in {-0.9, -0.7, ..., 0.9}, a evenly spaced over [-2.5, 2.5].
inline std::pair<autodiff::Tensor, autodiff::Tensor> mixture_grid() {
  autodiff::Tensor s(100, 1), a(100, 1);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      s[i * 10 + j] = -0.9 + 0.2 * i;
      a[i * 10 + j] = -2.5 + 5.0 / 9.0 * j;
    }
  }
  return {s, a};
}

// CVAE settings for the mixture task: default KL weight, a narrower fixed
// decoder variance than the action-space default, longer training.
inline cvae::CvaeConfig mixture_vae_config() {
  cvae::CvaeConfig c;
  c.decoder_log_var = std::log(0.25);
  c.iterations = 40'000;
  return c;
}

inline ActionBounds mixture_bounds() { return ActionBounds{{-4.0}, {4.0}}; }

}  // namespace spot::testing
