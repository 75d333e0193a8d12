#include "spot/data/generate.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "spot/envs/env.hpp"
#include "spot/envs/pointmaze.hpp"
#include "spot/errors.hpp"

namespace spot::data {

namespace {

using envs::Controller;
using envs::Env;
using envs::EnvSpec;

struct NoiseModel {
  double sigma = 0.0;            // fraction of half-range
  double random_fraction = 0.0;  // probability of a uniform action
};

std::vector<double> perturb(const EnvSpec& spec, std::vector<double> action,
                            const NoiseModel& noise, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (noise.random_fraction > 0.0 && unit(rng) < noise.random_fraction) {
    for (std::size_t i = 0; i < spec.action_dim; ++i) {
      action[i] = spec.action_low[i] +
                  unit(rng) * (spec.action_high[i] - spec.action_low[i]);
    }
    return action;
  }
  if (noise.sigma > 0.0) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t i = 0; i < spec.action_dim; ++i) {
      action[i] += noise.sigma * spec.action_half_range(i) * normal(rng);
    }
  }
  return spec.clip_action(action);
}

// Rolls controller episodes from the env's initial distribution until
// `count` transitions are stored. `noise_at` maps collected/count to noise.
template <typename NoiseAt>
void collect_episodes(OfflineDataset& ds, const std::string& env_name,
                      std::size_t count, std::mt19937_64& rng,
                      NoiseAt noise_at) {
  const std::unique_ptr<Env> env = envs::make_env(env_name);
  const std::unique_ptr<Controller> controller =
      envs::make_expert_controller(env_name);
  const std::size_t target = ds.size() + count;
  const std::size_t start = ds.size();
  while (ds.size() < target) {
    controller->reset();
    std::vector<double> obs = env->reset(rng);
    while (ds.size() < target) {
      const double progress =
          static_cast<double>(ds.size() - start) / static_cast<double>(count);
      std::vector<double> a =
          perturb(env->spec(), controller->act(obs), noise_at(progress), rng);
      const envs::StepResult step = env->step(a);
      // A trajectory cut by the size limit still gets an end marker so the
      // next one starts cleanly.
      Transition t{obs, a, step.reward + ds.reward_shift(), step.next_state,
                   step.terminal, step.done() || ds.size() + 1 == target};
      ds.add(t);
      if (step.done()) break;
      obs = step.next_state;
    }
  }
}

void collect_stitch(OfflineDataset& ds, std::size_t count,
                    const GenerateOptions& options, std::mt19937_64& rng) {
  using envs::Point;
  namespace maze = envs::maze;
  envs::PointMaze env;
  envs::MazeWaypointController controller;
  const int cells = static_cast<int>(maze::kCorridor.size());
  std::uniform_real_distribution<double> jitter(-options.stitch_jitter,
                                                options.stitch_jitter);
  const NoiseModel noise{options.expert_noise, 0.0};
  const auto jittered = [&](int cell) {
    const Point c = maze::kCorridor[cell];
    return Point{c.x + jitter(rng), c.y + jitter(rng)};
  };
  const std::size_t target = ds.size() + count;
  while (ds.size() < target) {
    // Origin never the goal cell; destination within the span limit.
    std::uniform_int_distribution<int> pick_from(0, cells - 2);
    const int from = pick_from(rng);
    std::vector<int> dests;
    for (int to = 0; to < cells; ++to) {
      if (to != from && std::abs(to - from) <= options.stitch_max_span) {
        dests.push_back(to);
      }
    }
    std::uniform_int_distribution<std::size_t> pick_to(0, dests.size() - 1);
    const int to = dests[pick_to(rng)];
    const Point start = jittered(from);
    controller.set_target(jittered(to));

    std::vector<Transition> segment;
    bool seen_start = maze::in_start_region(start);
    bool seen_goal = maze::in_goal(start);
    std::vector<double> obs = env.reset_to({start.x, start.y});
    for (int t = 0; t < options.stitch_max_steps; ++t) {
      std::vector<double> a =
          perturb(env.spec(), controller.act(obs), noise, rng);
      const envs::StepResult step = env.step(a);
      const Point p{step.next_state[0], step.next_state[1]};
      seen_start = seen_start || maze::in_start_region(p);
      seen_goal = seen_goal || maze::in_goal(p);
      const bool last = step.done() || controller.at_target(p) ||
                        t + 1 == options.stitch_max_steps;
      segment.push_back(Transition{obs, a, step.reward + ds.reward_shift(),
                                   step.next_state, step.terminal, last});
      if (last) break;
      obs = step.next_state;
    }
    if (seen_start && seen_goal) continue;
    for (const Transition& t : segment) {
      if (ds.size() == target) break;
      ds.add(t);
    }
  }
}

}  // namespace

OfflineDataset generate(const std::string& env_name, Regime regime,
                        std::size_t size, std::uint64_t seed,
                        const GenerateOptions& options) {
  const std::unique_ptr<Env> probe = envs::make_env(env_name);
  const EnvSpec& spec = probe->spec();
  if (regime == Regime::kStitch && env_name != "pointmaze") {
    throw ConfigError("stitch regime requires the pointmaze env");
  }
  if (size == 0) throw ConfigError("dataset size must be positive");
  OfflineDataset ds(env_name, regime, spec.state_dim, spec.action_dim);
  ds.reserve(size);
  if (spec.reward_kind == envs::RewardKind::kSparse) {
    ds.set_reward_shift(options.sparse_reward_shift);
  }
  std::mt19937_64 rng(seed);
  const NoiseModel expert{options.expert_noise, 0.0};
  const NoiseModel medium{options.medium_noise, options.medium_random_fraction};
  switch (regime) {
    case Regime::kExpert:
      collect_episodes(ds, env_name, size, rng, [&](double) { return expert; });
      break;
    case Regime::kMedium:
      collect_episodes(ds, env_name, size, rng, [&](double) { return medium; });
      break;
    case Regime::kMediumReplay:
      collect_episodes(ds, env_name, size, rng, [&](double progress) {
        return NoiseModel{options.replay_noise_start +
                              (options.replay_noise_end -
                               options.replay_noise_start) *
                                  progress,
                          0.0};
      });
      break;
    case Regime::kMediumExpert:
      collect_episodes(ds, env_name, size / 2, rng,
                       [&](double) { return expert; });
      collect_episodes(ds, env_name, size - size / 2, rng,
                       [&](double) { return medium; });
      break;
    case Regime::kStitch:
      collect_stitch(ds, size, options, rng);
      break;
  }
  return ds;
}

double mean_episode_return(const OfflineDataset& dataset) {
  const int horizon = envs::make_env(dataset.env_name())->spec().max_episode_steps;
  double total = 0.0;
  std::size_t episodes = 0;
  for (const auto& [begin, end] : dataset.episodes()) {
    const bool complete = dataset.done(end - 1) ||
                          end - begin == static_cast<std::size_t>(horizon);
    if (!complete) continue;
    for (std::size_t i = begin; i < end; ++i) {
      total += dataset.reward(i) - dataset.reward_shift();
    }
    ++episodes;
  }
  if (episodes == 0) throw ContractError("dataset holds no complete trajectory");
  return total / static_cast<double>(episodes);
}

}  // namespace spot::data
