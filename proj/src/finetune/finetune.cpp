#include "spot/finetune/finetune.hpp"

#include <algorithm>
#include <cmath>

#include "spot/agent/train.hpp"
#include "spot/cvae/cvae.hpp"
#include "spot/data/generate.hpp"
#include "spot/errors.hpp"

namespace spot::finetune {

using autodiff::Tensor;

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_dim,
                           std::size_t action_dim)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
  if (capacity == 0) throw ContractError("replay buffer capacity must be positive");
  states_.resize(capacity * state_dim);
  actions_.resize(capacity * action_dim);
  rewards_.resize(capacity);
  next_states_.resize(capacity * state_dim);
  dones_.resize(capacity);
}

ReplayBuffer ReplayBuffer::from_dataset(const data::OfflineDataset& dataset,
                                        std::size_t capacity) {
  ReplayBuffer buf(capacity, dataset.state_dim(), dataset.action_dim());
  for (std::size_t i = 0; i < dataset.size(); ++i) buf.add(dataset.at(i));
  return buf;
}

void ReplayBuffer::add(const data::Transition& t) {
  if (t.s.size() != state_dim_ || t.next_s.size() != state_dim_ ||
      t.a.size() != action_dim_) {
    throw DimensionError("transition does not fit the replay buffer");
  }
  std::size_t k;
  if (size_ < capacity_) {
    k = slot(size_);
    ++size_;
  } else {
    k = head_;
    head_ = (head_ + 1) % capacity_;
  }
  std::ranges::copy(t.s, states_.begin() + k * state_dim_);
  std::ranges::copy(t.a, actions_.begin() + k * action_dim_);
  std::ranges::copy(t.next_s, next_states_.begin() + k * state_dim_);
  rewards_[k] = t.r;
  dones_[k] = t.done ? 1.0 : 0.0;
}

data::Transition ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ContractError("replay buffer index out of range");
  const std::size_t k = slot(i);
  const auto row = [k](const std::vector<double>& v, std::size_t w) {
    return std::vector<double>(v.begin() + k * w, v.begin() + (k + 1) * w);
  };
  return {row(states_, state_dim_), row(actions_, action_dim_), rewards_[k],
          row(next_states_, state_dim_), dones_[k] != 0.0, false};
}

data::Batch ReplayBuffer::sample(std::size_t n, std::mt19937_64& rng) const {
  if (n == 0 || size_ == 0) throw ContractError("cannot sample an empty batch");
  data::Batch b{Tensor(n, state_dim_), Tensor(n, action_dim_), Tensor(n, 1),
                Tensor(n, state_dim_), Tensor(n, 1)};
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = slot(pick(rng));
    std::copy_n(states_.begin() + k * state_dim_, state_dim_, b.states.row_span(r).begin());
    std::copy_n(actions_.begin() + k * action_dim_, action_dim_,
                b.actions.row_span(r).begin());
    std::copy_n(next_states_.begin() + k * state_dim_, state_dim_,
                b.next_states.row_span(r).begin());
    b.rewards[r] = rewards_[k];
    b.dones[r] = dones_[k];
  }
  return b;
}

double lambda_at(const DecaySchedule& s, std::size_t t) {
  if (t > s.total_steps) throw ContractError("decay schedule queried past its end");
  if (s.total_steps == 0) return s.lambda0;
  const double progress = static_cast<double>(t) / static_cast<double>(s.total_steps);
  const double slope = (1.0 - s.floor_fraction) / s.knee_fraction;
  return s.lambda0 * std::max(s.floor_fraction, 1.0 - slope * progress);
}

void FinetuneConfig::validate() const {
  if (!(exploration_noise >= 0.0)) throw ConfigError("exploration_noise must be >= 0");
  if (eval_interval == 0 || log_interval == 0) {
    throw ConfigError("eval and log intervals must be positive");
  }
}

namespace {

std::vector<double> observe(const agent::SpotAgent& agent, std::span<const double> obs) {
  if (!agent.stats()) return {obs.begin(), obs.end()};
  return data::normalize_observation(*agent.stats(), obs);
}

agent::TrainLog online_loop(agent::SpotAgent& agent, ReplayBuffer& buffer,
                            const std::string& env_name, double reward_shift,
                            const DecaySchedule& schedule,
                            const FinetuneConfig& config,
                            const data::OfflineDataset* profile_data,
                            std::uint64_t seed) {
  const std::unique_ptr<envs::Env> env = envs::make_env(env_name);
  const envs::EnvSpec& spec = env->spec();
  if (spec.state_dim != agent.state_dim() || spec.action_dim != agent.bounds().dim()) {
    throw DimensionError("agent dims do not match env " + env_name);
  }
  std::mt19937_64 env_rng = agent::seeded_stream(seed, 11);
  std::mt19937_64 act_rng = agent::seeded_stream(seed, 12);
  std::mt19937_64 update_rng = agent::seeded_stream(seed, 13);
  const std::uint64_t eval_seed = agent::seeded_stream(seed, 2)();
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t batch_size = agent.config().batch_size;

  agent::TrainLog log;
  std::vector<double> obs = env->reset(env_rng);
  double episode_return = 0.0;
  double critic_sum = 0.0;
  std::size_t critic_n = 0;
  for (std::size_t t = 1; t <= config.steps; ++t) {
    agent.set_lambda(lambda_at(schedule, t));
    const std::vector<double> s = observe(agent, obs);
    std::vector<double> a = agent.act(Tensor::row(s)).storage();
    for (std::size_t j = 0; j < a.size(); ++j) {
      a[j] += config.exploration_noise * spec.action_half_range(j) * normal(act_rng);
    }
    a = spec.clip_action(a);
    const envs::StepResult step = env->step(a);
    episode_return += step.reward;
    buffer.add({s, a, step.reward + reward_shift, observe(agent, step.next_state),
                step.terminal, step.done()});
    if (step.done()) {
      log.add({"episode", t, {{"return", episode_return}}});
      episode_return = 0.0;
      obs = env->reset(env_rng);
    } else {
      obs = step.next_state;
    }

    if (buffer.size() >= batch_size) {
      const data::Batch batch = buffer.sample(batch_size, update_rng);
      critic_sum += agent::update_step(agent, batch, update_rng).critic_loss;
      ++critic_n;
    }
    if (t % config.log_interval == 0) {
      log.add({"finetune", t,
               {{"critic_loss", critic_n ? critic_sum / static_cast<double>(critic_n) : 0.0},
                {"lambda", agent.lambda()},
                {"buffer_size", static_cast<double>(buffer.size())}}});
      critic_sum = 0.0;
      critic_n = 0;
    }
    if (t % config.eval_interval == 0) {
      const agent::PolicyEvaluation ev =
          agent::evaluate(agent.policy(), *env, config.eval_episodes, eval_seed);
      double p5 = 0.0;
      if (profile_data != nullptr) {
        std::mt19937_64 prng = agent::seeded_stream(seed, 1'000'000 + t);
        p5 = agent::constraint_strength_profile(
                 agent, *profile_data,
                 {config.eval_profile_states, config.eval_profile_samples}, prng)
                 .p5;
      }
      log.add_eval({t, ev.mean_return, ev.normalized_score, ev.goal_rate, p5,
                    agent.lambda()});
    }
  }
  return log;
}

}  // namespace

FinetuneRun finetune(agent::SpotAgent agent, const data::OfflineDataset& dataset,
                     const FinetuneConfig& config, std::uint64_t seed) {
  config.validate();
  if (dataset.state_dim() != agent.state_dim() ||
      dataset.action_dim() != agent.bounds().dim()) {
    throw DimensionError("dataset dims do not match the agent");
  }
  if (dataset.stats() != agent.stats()) {
    throw ContractError("agent and dataset disagree on observation normalization");
  }
  ReplayBuffer buffer = ReplayBuffer::from_dataset(dataset, dataset.size() + config.steps);
  const DecaySchedule schedule{agent.lambda(), config.steps};
  agent::TrainLog log = online_loop(agent, buffer, dataset.env_name(),
                                    dataset.reward_shift(), schedule, config,
                                    &dataset, seed);
  agent.set_lambda(schedule.lambda0);
  return {std::move(agent), std::move(log)};
}

FinetuneRun from_scratch_baseline(const std::string& env_name,
                                  std::shared_ptr<const cvae::BehaviorDensity> density,
                                  agent::SpotConfig spot_config,
                                  std::optional<data::NormalizationStats> stats,
                                  const FinetuneConfig& config, std::uint64_t seed) {
  config.validate();
  const std::unique_ptr<envs::Env> env = envs::make_env(env_name);
  spot_config.lambda = 0.0;
  std::mt19937_64 init = agent::seeded_stream(seed, 0);
  agent::SpotAgent agent(env->spec().state_dim, cvae::bounds_for_env(env_name),
                         spot_config, std::move(density), init);
  agent.set_stats(std::move(stats));
  ReplayBuffer buffer(std::max<std::size_t>(config.steps, 1), env->spec().state_dim,
                      env->spec().action_dim);
  const double shift = env->spec().reward_kind == envs::RewardKind::kSparse
                           ? data::GenerateOptions{}.sparse_reward_shift
                           : 0.0;
  agent::TrainLog log = online_loop(agent, buffer, env_name, shift,
                                    DecaySchedule{0.0, config.steps}, config,
                                    nullptr, seed);
  return {std::move(agent), std::move(log)};
}

}  // namespace spot::finetune
