#pragma once

#include <cstddef>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace spot::envs {

enum class RewardKind { kDense, kSparse };

struct EnvSpec {
  std::string name;
  std::size_t state_dim = 0;
  std::size_t action_dim = 0;
  std::vector<double> action_low;
  std::vector<double> action_high;
  int max_episode_steps = 0;
  RewardKind reward_kind = RewardKind::kDense;

  double action_center(std::size_t i) const {
    return 0.5 * (action_high[i] + action_low[i]);
  }
  double action_half_range(std::size_t i) const {
    return 0.5 * (action_high[i] - action_low[i]);
  }
  std::vector<double> clip_action(std::span<const double> action) const;
};

// Result of one transition. `terminal` marks a true episode end (goal);
// `truncated` marks the time limit. done() is either.
struct StepResult {
  std::vector<double> next_state;
  double reward = 0.0;
  bool terminal = false;
  bool truncated = false;

  bool done() const { return terminal || truncated; }
};

struct EnvState {
  std::vector<double> observation;
  int step_count = 0;
  bool done = false;
};

// Episode wrapper around a pure dynamics function. Out-of-bound actions are
// clipped, never rejected; stepping a finished episode is a ContractError.
class Env {
 public:
  virtual ~Env() = default;

  const EnvSpec& spec() const { return spec_; }
  const EnvState& state() const { return state_; }

  // Starts an episode from the environment's initial-state distribution.
  const std::vector<double>& reset(std::mt19937_64& rng);
  // Starts an episode from a given observation.
  const std::vector<double>& reset_to(std::vector<double> observation);
  StepResult step(std::span<const double> action);

  virtual std::unique_ptr<Env> clone() const = 0;

 protected:
  explicit Env(EnvSpec spec) : spec_(std::move(spec)) {}

  virtual std::vector<double> sample_initial_state(std::mt19937_64& rng) const = 0;
  // Pure transition on an already clipped action; sets reward and terminal.
  virtual StepResult transition(std::span<const double> state,
                                std::span<const double> action) const = 0;

 private:
  EnvSpec spec_;
  EnvState state_;
  bool started_ = false;
};

// Scripted controller used for datasets and reference returns.
class Controller {
 public:
  virtual ~Controller() = default;
  virtual std::vector<double> act(std::span<const double> observation) = 0;
  // Called at the start of each episode.
  virtual void reset() {}
};

std::unique_ptr<Env> make_env(const std::string& name);
std::unique_ptr<Controller> make_expert_controller(const std::string& env_name);
std::vector<std::string> env_names();

}  // namespace spot::envs
