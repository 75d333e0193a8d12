#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "spot/data/dataset.hpp"

// Scripted behavior datasets. Noise levels are fractions of the action
// half-range.
namespace spot::data {

struct GenerateOptions {
  double expert_noise = 0.1;
  double medium_noise = 0.3;
  double medium_random_fraction = 0.2;
  double replay_noise_start = 1.0;
  double replay_noise_end = 0.3;
  // Stitch segments: cells apart at most, endpoint jitter, step cap.
  int stitch_max_span = 3;
  double stitch_jitter = 0.3;
  int stitch_max_steps = 100;
  // Applied when the env has sparse reward.
  double sparse_reward_shift = -1.0;
};

// Throws ConfigError for an unknown env or stitch on a non-maze env.
OfflineDataset generate(const std::string& env_name, Regime regime,
                        std::size_t size, std::uint64_t seed,
                        const GenerateOptions& options = {});

// Mean undiscounted return over stored trajectories that terminated or ran
// the full horizon, with the reward shift undone.
double mean_episode_return(const OfflineDataset& dataset);

}  // namespace spot::data
