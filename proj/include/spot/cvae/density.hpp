#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "spot/action_bounds.hpp"
#include "spot/autodiff/checkpoint.hpp"
#include "spot/autodiff/graph.hpp"

// Behavior-density models: anything that yields log pi_beta(a|s) estimates
// both inside a graph (for the actor regularizer) and graph-free (analysis).
namespace spot::cvae {

class BehaviorDensity {
 public:
  virtual ~BehaviorDensity() = default;

  virtual std::string kind() const = 0;
  virtual std::size_t state_dim() const = 0;
  virtual std::size_t action_dim() const = 0;
  virtual const ActionBounds& bounds() const = 0;

  // Noise columns per row consumed by log_density (0 if none).
  virtual std::size_t noise_width() const = 0;

  // Per-row [B, 1] differentiable training-time estimate. The model's own
  // parameters enter as constants; gradients flow to s and a.
  virtual autodiff::Var log_density(autodiff::Graph& g, autodiff::Var s,
                                    autodiff::Var a,
                                    const autodiff::Tensor& noise) const = 0;

  // Training-time estimate from `samples` latent draws; `noise` holds
  // samples x noise_width() columns per row. One draw is log_density.
  // Models without latents ignore `samples`.
  virtual autodiff::Var log_density_samples(autodiff::Graph& g, autodiff::Var s,
                                            autodiff::Var a,
                                            const autodiff::Tensor& noise,
                                            std::size_t samples) const;

  // Graph-free estimate using `num_samples` draws where the model needs
  // them. One value per row.
  virtual std::vector<double> estimate_log_density(
      const autodiff::Tensor& s, const autodiff::Tensor& a,
      std::size_t num_samples, std::mt19937_64& rng) const = 0;

  virtual std::vector<autodiff::NamedTensor> to_tensors(
      const std::string& prefix) const = 0;
  virtual std::unique_ptr<BehaviorDensity> clone() const = 0;

  // Stateless base; lets derived models default their comparisons.
  bool operator==(const BehaviorDensity&) const { return true; }
};

// Standard normal noise for log_density on a batch of `rows`.
autodiff::Tensor sample_density_noise(const BehaviorDensity& model,
                                      std::size_t rows, std::mt19937_64& rng,
                                      std::size_t samples = 1);

// Rebuilds a model from tensors written by to_tensors(prefix).
std::unique_ptr<BehaviorDensity> density_from_tensors(
    const std::vector<autodiff::NamedTensor>& tensors,
    const std::string& prefix);

void save_density(const std::filesystem::path& path,
                  const BehaviorDensity& model);
std::unique_ptr<BehaviorDensity> load_density(const std::filesystem::path& path);

}  // namespace spot::cvae
