#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "spot/autodiff/mlp.hpp"
#include "spot/cvae/density.hpp"
#include "spot/data/dataset.hpp"

namespace spot::cvae {

struct CvaeConfig {
  std::size_t hidden = 64;
  std::size_t layers = 3;
  // 0 means 2 x action_dim.
  std::size_t latent_dim = 0;
  double kl_weight = 0.5;
  // Fixed decoder output variance is exp(decoder_log_var).
  double decoder_log_var = 0.0;
  double log_var_min = -8.0;
  double log_var_max = 8.0;
  double learning_rate = 1e-3;
  std::size_t batch_size = 256;
  std::size_t iterations = 20'000;
};

enum class KlEstimator {
  // Closed form KL(q || N(0, I)) for diagonal Gaussians.
  kAnalytic,
  // log q(z|a,s) - log p(z) at the reparameterized sample.
  kSampled,
};

struct ElboOptions {
  double kl_weight = 0.5;
  KlEstimator kl = KlEstimator::kAnalytic;
};

// Encoder (s, a) -> (mu_z, log var_z); decoder (s, z) -> action mean,
// tanh-scaled to the action bounds, with fixed isotropic variance.
class CvaeModel final : public BehaviorDensity {
 public:
  CvaeModel(std::size_t state_dim, ActionBounds bounds,
            const CvaeConfig& config, std::mt19937_64& rng);
  CvaeModel(std::size_t state_dim, ActionBounds bounds,
            const CvaeConfig& config, autodiff::Mlp encoder,
            autodiff::Mlp decoder);

  std::string kind() const override { return "cvae"; }
  std::size_t state_dim() const override { return state_dim_; }
  std::size_t action_dim() const override { return bounds_.dim(); }
  const ActionBounds& bounds() const override { return bounds_; }
  std::size_t noise_width() const override { return latent_dim_; }

  std::size_t latent_dim() const { return latent_dim_; }
  double kl_weight() const { return kl_weight_; }
  double decoder_log_var() const { return decoder_log_var_; }
  double log_var_min() const { return log_var_min_; }
  double log_var_max() const { return log_var_max_; }
  ElboOptions training_elbo() const { return {kl_weight_, KlEstimator::kAnalytic}; }

  autodiff::Mlp& encoder() { return encoder_; }
  const autodiff::Mlp& encoder() const { return encoder_; }
  autodiff::Mlp& decoder() { return decoder_; }
  const autodiff::Mlp& decoder() const { return decoder_; }

  struct Bound {
    const CvaeModel* model = nullptr;
    autodiff::BoundMlp encoder;
    autodiff::BoundMlp decoder;
  };
  Bound bind(autodiff::Graph& g, bool trainable) const;

  // -(per-row ELBO loss) with the model's own training options.
  autodiff::Var log_density(autodiff::Graph& g, autodiff::Var s,
                            autodiff::Var a,
                            const autodiff::Tensor& noise) const override;
  // Differentiable importance-weighted estimate with unit-weight sampled
  // terms for samples > 1; the training ELBO for samples == 1.
  autodiff::Var log_density_samples(autodiff::Graph& g, autodiff::Var s,
                                    autodiff::Var a, const autodiff::Tensor& noise,
                                    std::size_t samples) const override;
  // Importance-weighted estimate with num_samples latent draws.
  std::vector<double> estimate_log_density(
      const autodiff::Tensor& s, const autodiff::Tensor& a,
      std::size_t num_samples, std::mt19937_64& rng) const override;

  std::vector<autodiff::NamedTensor> to_tensors(
      const std::string& prefix) const override;
  static CvaeModel from_tensors(const std::vector<autodiff::NamedTensor>& ts,
                                const std::string& prefix);
  std::unique_ptr<BehaviorDensity> clone() const override;

  bool operator==(const CvaeModel&) const = default;

 private:
  std::size_t state_dim_ = 0;
  ActionBounds bounds_;
  std::size_t latent_dim_ = 0;
  double kl_weight_ = 0.5;
  double decoder_log_var_ = 0.0;
  double log_var_min_ = -8.0;
  double log_var_max_ = 8.0;
  autodiff::Mlp encoder_;
  autodiff::Mlp decoder_;
};

// Per-row pieces of the ELBO on one reparameterized sample.
struct ElboTerms {
  autodiff::Var reconstruction;  // log p(a | z, s)
  autodiff::Var kl;              // KL term per the chosen estimator
  autodiff::Var loss;            // -reconstruction + kl_weight * kl
};

ElboTerms elbo_terms(const CvaeModel::Bound& model, autodiff::Var s,
                     autodiff::Var a, const autodiff::Tensor& noise,
                     const ElboOptions& options);
// Batch mean of ElboTerms::loss.
autodiff::Var elbo_loss(const CvaeModel::Bound& model, autodiff::Var s,
                        autodiff::Var a, const autodiff::Tensor& noise,
                        const ElboOptions& options);
// Per-row loss values, graph built internally.
std::vector<double> elbo_loss_rows(const CvaeModel& model,
                                   const autodiff::Tensor& s,
                                   const autodiff::Tensor& a,
                                   const autodiff::Tensor& noise,
                                   const ElboOptions& options);

struct DensityEstimate {
  double value = 0.0;
  std::size_t num_samples = 0;
};

// log((1/L) sum_l p(a, z_l | s) / q(z_l | a, s)) per row via log-sum-exp.
// `noise` is [B * L, latent_dim]; row b * L + l drives sample l of datum b.
// Throws ContractError for L = 0.
std::vector<DensityEstimate> iw_log_density(const CvaeModel& model,
                                            const autodiff::Tensor& s,
                                            const autodiff::Tensor& a,
                                            std::size_t num_samples,
                                            const autodiff::Tensor& noise);

struct VaeTrainResult {
  CvaeModel model;
  std::vector<double> loss_trace;
};

// Adam on the ELBO loss with the configured KL weight. Numeric failures are
// rethrown naming the iteration.
VaeTrainResult train_vae(const autodiff::Tensor& states,
                         const autodiff::Tensor& actions,
                         const ActionBounds& bounds, const CvaeConfig& config,
                         std::uint64_t seed);
VaeTrainResult train_vae(const data::OfflineDataset& dataset,
                         const CvaeConfig& config, std::uint64_t seed);

// All states and actions of a dataset as [N, dim] tensors.
std::pair<autodiff::Tensor, autodiff::Tensor> state_action_tensors(
    const data::OfflineDataset& dataset);
ActionBounds bounds_for_env(const std::string& env_name);

}  // namespace spot::cvae
