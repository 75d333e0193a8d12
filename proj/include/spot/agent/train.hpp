#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <random>
#include <vector>

#include "spot/agent/policy.hpp"
#include "spot/agent/spot_agent.hpp"
#include "spot/agent/train_log.hpp"
#include "spot/cvae/density.hpp"
#include "spot/data/dataset.hpp"
#include "spot/envs/env.hpp"

namespace spot::agent {

// Independent generator for stream `stream` of a run seeded with `seed`.
std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t stream);

struct OfflineRun {
  SpotAgent agent;
  TrainLog log;
};

// Builds the agent for `dataset` (whose states should already be
// normalized) with a fresh initialization drawn from `seed`.
SpotAgent make_agent(const data::OfflineDataset& dataset,
                     std::shared_ptr<const cvae::BehaviorDensity> density,
                     const SpotConfig& config, std::uint64_t seed);

// `config.steps` critic updates with an actor update every policy_freq-th,
// logging every log_interval steps and evaluating every eval_interval.
OfflineRun train_offline(const data::OfflineDataset& dataset,
                         std::shared_ptr<const cvae::BehaviorDensity> density,
                         const SpotConfig& config, std::uint64_t seed);

// Continues training `agent` in place. Log steps count the agent's critic
// updates, so a resumed run keeps numbering where it stopped.
void run_offline_steps(SpotAgent& agent, const data::OfflineDataset& dataset,
                       std::size_t steps, std::uint64_t seed, TrainLog& log);

// One critic update plus, when due, one actor update on `batch`.
struct UpdateStats {
  double critic_loss = 0.0;
  bool actor_updated = false;
  ActorUpdateResult actor;
};
UpdateStats update_step(SpotAgent& agent, const data::Batch& batch,
                        std::mt19937_64& rng);

struct ProfileOptions {
  std::size_t num_states = 5'000;
  std::size_t num_samples = 500;
};

// Nearest-rank percentiles of per-state log pi_beta estimates.
struct ProfileSummary {
  double p5 = 0.0;
  double p25 = 0.0;
  double p50 = 0.0;
  std::vector<double> values;
};

// Rows of `dataset` to profile: all of them when the dataset is small,
// otherwise a uniform subsample without replacement.
std::vector<std::size_t> profile_rows(const data::OfflineDataset& dataset,
                                      std::size_t num_states,
                                      std::mt19937_64& rng);

ProfileSummary density_profile(const cvae::BehaviorDensity& density,
                               const autodiff::Tensor& states,
                               const autodiff::Tensor& actions,
                               std::size_t num_samples, std::mt19937_64& rng);

// Profile of the policy's actions over dataset states.
ProfileSummary constraint_strength_profile(const DeterministicPolicy& policy,
                                           const cvae::BehaviorDensity& density,
                                           const data::OfflineDataset& dataset,
                                           const ProfileOptions& options,
                                           std::mt19937_64& rng);
ProfileSummary constraint_strength_profile(const SpotAgent& agent,
                                           const data::OfflineDataset& dataset,
                                           const ProfileOptions& options,
                                           std::mt19937_64& rng);
// Profile of the dataset's own actions.
ProfileSummary behavior_profile(const cvae::BehaviorDensity& density,
                                const data::OfflineDataset& dataset,
                                const ProfileOptions& options,
                                std::mt19937_64& rng);

// Raw-return evaluation of a policy on the dataset's env.
struct PolicyEvaluation {
  double mean_return = 0.0;
  double normalized_score = 0.0;
  double goal_rate = 0.0;
};
PolicyEvaluation evaluate(const DeterministicPolicy& policy,
                          const envs::Env& env, std::size_t episodes,
                          std::uint64_t seed);

struct BcConfig {
  std::size_t hidden = 64;
  std::size_t layers = 3;
  double lr = 1e-3;
  std::size_t batch_size = 256;
  std::size_t steps = 20'000;

  void validate() const;
};

struct BcRun {
  DeterministicPolicy policy;
  std::vector<double> loss_trace;
};

// Mean squared action regression with the SPOT actor architecture.
BcRun bc_baseline(const data::OfflineDataset& dataset, const BcConfig& config,
                  std::uint64_t seed);

}  // namespace spot::agent
