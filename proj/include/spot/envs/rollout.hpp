#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "spot/envs/env.hpp"

namespace spot::envs {

using PolicyFn = std::function<std::vector<double>(std::span<const double>)>;

struct EpisodeResult {
  double total_return = 0.0;
  int steps = 0;
  bool reached_goal = false;
};

// Runs one episode from env.reset(rng) until done. Rewards are the
// environment's raw (unshifted) rewards.
EpisodeResult run_episode(Env& env, const PolicyFn& policy, std::mt19937_64& rng);

struct EvaluationSummary {
  double mean_return = 0.0;
  double goal_rate = 0.0;
  std::vector<double> returns;
};

// Mean over `episodes` episodes; the env's initial states come from a
// generator seeded with `seed`.
EvaluationSummary evaluate_policy(const Env& env, const PolicyFn& policy,
                                  std::size_t episodes, std::uint64_t seed);

PolicyFn uniform_random_policy(const EnvSpec& spec, std::mt19937_64& rng);

}  // namespace spot::envs
