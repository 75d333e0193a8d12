#include "spot/envs/rollout.hpp"

namespace spot::envs {

EpisodeResult run_episode(Env& env, const PolicyFn& policy,
                          std::mt19937_64& rng) {
  EpisodeResult result;
  std::vector<double> obs = env.reset(rng);
  while (true) {
    const StepResult step = env.step(policy(obs));
    result.total_return += step.reward;
    ++result.steps;
    if (step.terminal) result.reached_goal = true;
    if (step.done()) break;
    obs = step.next_state;
  }
  return result;
}

EvaluationSummary evaluate_policy(const Env& env, const PolicyFn& policy,
                                  std::size_t episodes, std::uint64_t seed) {
  EvaluationSummary summary;
  if (episodes == 0) return summary;
  std::mt19937_64 rng(seed);
  std::unique_ptr<Env> local = env.clone();
  std::size_t goals = 0;
  for (std::size_t i = 0; i < episodes; ++i) {
    const EpisodeResult r = run_episode(*local, policy, rng);
    summary.returns.push_back(r.total_return);
    summary.mean_return += r.total_return;
    if (r.reached_goal) ++goals;
  }
  summary.mean_return /= static_cast<double>(episodes);
  summary.goal_rate =
      static_cast<double>(goals) / static_cast<double>(episodes);
  return summary;
}

PolicyFn uniform_random_policy(const EnvSpec& spec, std::mt19937_64& rng) {
  return [spec, &rng](std::span<const double>) {
    std::vector<double> a(spec.action_dim);
    for (std::size_t i = 0; i < spec.action_dim; ++i) {
      std::uniform_real_distribution<double> u(spec.action_low[i],
                                               spec.action_high[i]);
      a[i] = u(rng);
    }
    return a;
  };
}

}  // namespace spot::envs
