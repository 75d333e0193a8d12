#include "spot/envs/env.hpp"

#include <algorithm>
#include <cmath>

#include "spot/envs/pendulum.hpp"
#include "spot/envs/pointmaze.hpp"
#include "spot/errors.hpp"

namespace spot::envs {

std::vector<double> EnvSpec::clip_action(std::span<const double> action) const {
  if (action.size() != action_dim) {
    throw DimensionError("action has " + std::to_string(action.size()) +
                         " entries, env " + name + " expects " +
                         std::to_string(action_dim));
  }
  std::vector<double> out(action.begin(), action.end());
  for (std::size_t i = 0; i < action_dim; ++i) {
    if (!std::isfinite(out[i])) throw NumericError("non-finite action");
    out[i] = std::clamp(out[i], action_low[i], action_high[i]);
  }
  return out;
}

const std::vector<double>& Env::reset(std::mt19937_64& rng) {
  return reset_to(sample_initial_state(rng));
}

const std::vector<double>& Env::reset_to(std::vector<double> observation) {
  if (observation.size() != spec_.state_dim) {
    throw DimensionError("observation has " +
                         std::to_string(observation.size()) +
                         " entries, env " + spec_.name + " expects " +
                         std::to_string(spec_.state_dim));
  }
  state_ = EnvState{std::move(observation), 0, false};
  started_ = true;
  return state_.observation;
}

StepResult Env::step(std::span<const double> action) {
  if (!started_) throw ContractError("step before reset");
  if (state_.done) throw ContractError("step after episode end; call reset");
  const std::vector<double> clipped = spec_.clip_action(action);
  StepResult result = transition(state_.observation, clipped);
  ++state_.step_count;
  result.truncated =
      !result.terminal && state_.step_count >= spec_.max_episode_steps;
  state_.observation = result.next_state;
  state_.done = result.done();
  return result;
}

std::unique_ptr<Env> make_env(const std::string& name) {
  if (name == "pointmaze") return std::make_unique<PointMaze>();
  if (name == "pendulum") return std::make_unique<Pendulum>();
  throw ConfigError("unknown env '" + name + "' (expected pointmaze or pendulum)");
}

std::unique_ptr<Controller> make_expert_controller(const std::string& env_name) {
  if (env_name == "pointmaze") return std::make_unique<MazeWaypointController>();
  if (env_name == "pendulum") return std::make_unique<PendulumSwingUpController>();
  throw ConfigError("unknown env '" + env_name + "'");
}

std::vector<std::string> env_names() { return {"pointmaze", "pendulum"}; }

}  // namespace spot::envs
