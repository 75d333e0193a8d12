#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "spot/action_bounds.hpp"
#include "spot/agent/policy.hpp"
#include "spot/autodiff/adam.hpp"
#include "spot/autodiff/checkpoint.hpp"
#include "spot/autodiff/mlp.hpp"
#include "spot/cvae/density.hpp"
#include "spot/data/dataset.hpp"
#include "spot/envs/env.hpp"

namespace spot::agent {

struct SpotConfig {
  std::size_t hidden = 64;
  std::size_t layers = 3;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  std::size_t batch_size = 256;
  double discount = 0.99;
  double tau = 0.005;
  // Target smoothing noise and clip, as fractions of the action half-range.
  double policy_noise = 0.2;
  double noise_clip = 0.5;
  std::size_t policy_freq = 2;
  double lambda = 0.1;
  bool q_norm = true;
  double actor_dropout = 0.0;
  // Latent draws L in the training-time density estimate.
  std::size_t density_samples = 1;

  std::size_t steps = 100'000;
  std::size_t eval_interval = 5'000;
  std::size_t eval_episodes = 10;
  std::size_t log_interval = 1'000;
  // States and latent samples behind the percentile5_logpb column.
  std::size_t eval_profile_states = 1'000;
  std::size_t eval_profile_samples = 100;

  // Throws ConfigError on out-of-range values (negative lambda, tau outside
  // [0, 1], zero batch, ...).
  void validate() const;
};

// Dense envs: actor lr 3e-4, dropout 0.1, 10 eval episodes. Sparse envs:
// actor lr 1e-4, no dropout, 20 eval episodes.
SpotConfig default_spot_config(envs::RewardKind kind);
std::vector<double> default_lambda_grid(envs::RewardKind kind);

// Actor, twin critics, their targets, optimizer states and the frozen
// behavior density.
class SpotAgent {
 public:
  SpotAgent(std::size_t state_dim, ActionBounds bounds, SpotConfig config,
            std::shared_ptr<const cvae::BehaviorDensity> density,
            std::mt19937_64& init_rng);

  const SpotConfig& config() const { return config_; }
  SpotConfig& mutable_config() { return config_; }
  double lambda() const { return config_.lambda; }
  void set_lambda(double lambda);
  std::size_t state_dim() const { return state_dim_; }
  const ActionBounds& bounds() const { return bounds_; }
  const cvae::BehaviorDensity& density() const { return *density_; }
  std::shared_ptr<const cvae::BehaviorDensity> density_ptr() const { return density_; }

  autodiff::Mlp& actor() { return actor_; }
  const autodiff::Mlp& actor() const { return actor_; }
  autodiff::Mlp& actor_target() { return actor_target_; }
  const autodiff::Mlp& actor_target() const { return actor_target_; }
  // i in {0, 1}.
  autodiff::Mlp& critic(int i) { return critics_[i]; }
  const autodiff::Mlp& critic(int i) const { return critics_[i]; }
  autodiff::Mlp& critic_target(int i) { return critic_targets_[i]; }
  const autodiff::Mlp& critic_target(int i) const { return critic_targets_[i]; }

  autodiff::AdamState& actor_adam() { return actor_adam_; }
  autodiff::AdamState& critic_adam(int i) { return critic_adam_[i]; }

  // Critic updates performed so far; the actor trains on every
  // policy_freq-th one.
  std::size_t update_count() const { return update_count_; }
  void count_update() { ++update_count_; }

  const std::optional<data::NormalizationStats>& stats() const { return stats_; }
  void set_stats(std::optional<data::NormalizationStats> stats) {
    stats_ = std::move(stats);
  }

  // Deterministic actions for normalized states.
  autodiff::Tensor act(const autodiff::Tensor& states) const;
  autodiff::Tensor act_target(const autodiff::Tensor& states) const;
  DeterministicPolicy policy() const;

  // Every network, optimizer moment and counter, plus the density model
  // under "density.".
  std::vector<autodiff::NamedTensor> to_tensors() const;
  static SpotAgent from_tensors(const std::vector<autodiff::NamedTensor>& ts);

  bool same_parameters(const SpotAgent& other) const;

 private:
  SpotAgent() = default;

  std::size_t state_dim_ = 0;
  ActionBounds bounds_;
  SpotConfig config_;
  std::shared_ptr<const cvae::BehaviorDensity> density_;
  autodiff::Mlp actor_;
  autodiff::Mlp actor_target_;
  autodiff::Mlp critics_[2];
  autodiff::Mlp critic_targets_[2];
  autodiff::AdamState actor_adam_;
  autodiff::AdamState critic_adam_[2];
  std::size_t update_count_ = 0;
  std::optional<data::NormalizationStats> stats_;
};

void save_agent(const std::filesystem::path& path, const SpotAgent& agent);
SpotAgent load_agent(const std::filesystem::path& path);

// Clipped Gaussian smoothing noise in action units, [rows, action_dim].
autodiff::Tensor sample_target_noise(const SpotAgent& agent, std::size_t rows,
                                     std::mt19937_64& rng);

// y = r + gamma (1 - done) min_i Qbar_i(s', clip(pibar(s') + noise)).
// Computed graph-free, so nothing upstream of y can receive gradient.
autodiff::Tensor critic_target(const SpotAgent& agent, const data::Batch& batch,
                               const autodiff::Tensor& noise);

// mean((Q1 - y)^2) + mean((Q2 - y)^2) on bound critics.
autodiff::Var critic_loss(const autodiff::BoundMlp& q1,
                          const autodiff::BoundMlp& q2, autodiff::Var states,
                          autodiff::Var actions, const autodiff::Tensor& y);

// One Adam step on each critic against the shared target; returns the loss
// before the step.
double critic_update(SpotAgent& agent, const data::Batch& batch,
                     const autodiff::Tensor& noise);

// mean |q| floored at 1e-8, or 1 when disabled.
double q_normalizer(std::span<const double> q_values, bool enabled);
// The normalizer for Q1 at the current actor's actions on batch states.
double q_normalizer(const SpotAgent& agent, const data::Batch& batch);

struct ActorLoss {
  autodiff::Var loss;
  autodiff::Var q;            // [B, 1] Q1 at actor actions
  autodiff::Var log_density;  // [B, 1] training-time log pi_beta estimate
  double alpha = 1.0;
};

// -mean(Q1(s, pi(s))) / alpha - lambda * mean(log pi_beta(pi(s) | s)) with
// critic and density frozen. alpha comes from the batch unless given.
ActorLoss actor_loss(const SpotAgent& agent, const autodiff::BoundMlp& actor,
                     autodiff::Var states, const autodiff::Tensor& density_noise,
                     std::span<const autodiff::Tensor> dropout_masks,
                     double lambda, std::optional<double> alpha = std::nullopt);

struct ActorUpdateResult {
  double loss = 0.0;
  double alpha = 1.0;
  double mean_q = 0.0;
  double mean_log_density = 0.0;
};

// One Adam step on the actor, then Polyak updates of the actor and both
// critic targets.
ActorUpdateResult actor_update(SpotAgent& agent, const data::Batch& batch,
                               const autodiff::Tensor& density_noise,
                               std::span<const autodiff::Tensor> dropout_masks);

// Exact Polyak step of all three targets toward the online networks.
void update_targets(SpotAgent& agent);

}  // namespace spot::agent
