#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spot/agent/spot_agent.hpp"
#include "spot/agent/train_log.hpp"
#include "spot/data/dataset.hpp"
#include "spot/envs/env.hpp"

namespace spot::finetune {

// Fixed-capacity ring of transitions; once full, each add evicts the oldest.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim);
  // Holds every dataset transition, in order.
  static ReplayBuffer from_dataset(const data::OfflineDataset& dataset,
                                   std::size_t capacity);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_dim() const { return action_dim_; }

  void add(const data::Transition& t);
  // i = 0 is the oldest stored transition.
  data::Transition at(std::size_t i) const;
  // Uniform with replacement over current contents.
  data::Batch sample(std::size_t n, std::mt19937_64& rng) const;

 private:
  std::size_t slot(std::size_t i) const { return (head_ + i) % capacity_; }

  std::size_t capacity_;
  std::size_t state_dim_;
  std::size_t action_dim_;
  std::size_t head_ = 0;
  std::size_t size_ = 0;
  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> next_states_;
  std::vector<double> dones_;
};

// Linear decay from lambda0 to floor_fraction * lambda0 at knee_fraction * T,
// then held.
struct DecaySchedule {
  double lambda0 = 0.0;
  std::size_t total_steps = 0;
  double floor_fraction = 0.2;
  double knee_fraction = 0.8;
};

// Throws ContractError for t > total_steps.
double lambda_at(const DecaySchedule& schedule, std::size_t t);

struct FinetuneConfig {
  std::size_t steps = 10'000;
  // Gaussian action noise as a fraction of the action half-range.
  double exploration_noise = 0.1;
  std::size_t eval_interval = 1'000;
  std::size_t eval_episodes = 20;
  std::size_t log_interval = 1'000;
  std::size_t eval_profile_states = 1'000;
  std::size_t eval_profile_samples = 100;

  void validate() const;
};

struct FinetuneRun {
  agent::SpotAgent agent;
  agent::TrainLog log;
};

// One environment step then one update cycle per online step, with lambda
// decayed from the agent's offline value. The density model and observation
// statistics stay frozen. Throws DimensionError when the agent does not fit
// the dataset.
FinetuneRun finetune(agent::SpotAgent agent, const data::OfflineDataset& dataset,
                     const FinetuneConfig& config, std::uint64_t seed);

// The same loop from a fresh agent with lambda = 0 and an empty buffer.
// Updates start once the buffer holds one batch.
FinetuneRun from_scratch_baseline(const std::string& env_name,
                                  std::shared_ptr<const cvae::BehaviorDensity> density,
                                  agent::SpotConfig spot_config,
                                  std::optional<data::NormalizationStats> stats,
                                  const FinetuneConfig& config, std::uint64_t seed);

}  // namespace spot::finetune
