#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "spot/autodiff/mlp.hpp"
#include "spot/cvae/cvae.hpp"
#include "spot/cvae/density.hpp"

// Conditional diagonal tanh-Gaussian: a = center + half * tanh(u) with
// u ~ N(mu(s), diag(exp(log_var(s)))). Exact density, no latent variable.
namespace spot::cvae {

class GaussianDensityModel final : public BehaviorDensity {
 public:
  // Normalized actions are kept within 1 - kEdge of the bounds so the
  // inverse tanh stays finite.
  static constexpr double kEdge = 1e-6;
  static constexpr double kLogVarMin = -10.0;
  static constexpr double kLogVarMax = 4.0;

  GaussianDensityModel(std::size_t state_dim, ActionBounds bounds,
                       std::size_t hidden, std::size_t layers,
                       std::mt19937_64& rng);
  GaussianDensityModel(std::size_t state_dim, ActionBounds bounds,
                       autodiff::Mlp net);

  std::string kind() const override { return "gaussian"; }
  std::size_t state_dim() const override { return state_dim_; }
  std::size_t action_dim() const override { return bounds_.dim(); }
  const ActionBounds& bounds() const override { return bounds_; }
  std::size_t noise_width() const override { return 0; }

  autodiff::Mlp& net() { return net_; }
  const autodiff::Mlp& net() const { return net_; }

  // Same as log_density but with the network bound trainably.
  autodiff::Var log_density_with(const autodiff::BoundMlp& net,
                                 autodiff::Var s, autodiff::Var a) const;
  autodiff::Var log_density(autodiff::Graph& g, autodiff::Var s,
                            autodiff::Var a,
                            const autodiff::Tensor& noise) const override;
  std::vector<double> estimate_log_density(
      const autodiff::Tensor& s, const autodiff::Tensor& a,
      std::size_t num_samples, std::mt19937_64& rng) const override;

  std::vector<autodiff::NamedTensor> to_tensors(
      const std::string& prefix) const override;
  static GaussianDensityModel from_tensors(
      const std::vector<autodiff::NamedTensor>& ts, const std::string& prefix);
  std::unique_ptr<BehaviorDensity> clone() const override;

  bool operator==(const GaussianDensityModel&) const = default;

 private:
  std::size_t state_dim_ = 0;
  ActionBounds bounds_;
  autodiff::Mlp net_;
};

struct GaussianTrainResult {
  GaussianDensityModel model;
  std::vector<double> loss_trace;
};

// Maximum likelihood with Adam; reuses the network, optimizer and batch
// settings of CvaeConfig.
GaussianTrainResult train_gaussian_density(const autodiff::Tensor& states,
                                           const autodiff::Tensor& actions,
                                           const ActionBounds& bounds,
                                           const CvaeConfig& config,
                                           std::uint64_t seed);
GaussianTrainResult gaussian_density_baseline(
    const data::OfflineDataset& dataset, const CvaeConfig& config,
    std::uint64_t seed);

}  // namespace spot::cvae
