#include "spot/agent/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spot/autodiff/adam.hpp"
#include "spot/autodiff/ops.hpp"
#include "spot/cvae/cvae.hpp"
#include "spot/envs/reference.hpp"
#include "spot/envs/rollout.hpp"
#include "spot/errors.hpp"
#include "spot/numerics.hpp"

namespace spot::agent {

using autodiff::Tensor;

namespace {

// Rows per graph-free density call; bounds memory at L = 500.
constexpr std::size_t kProfileChunk = 64;

template <typename Row>
Tensor rows_of(Row row, std::size_t width, std::span<const std::size_t> rows) {
  Tensor out(rows.size(), width);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::ranges::copy(row(rows[i]), out.row_span(i).begin());
  }
  return out;
}

Tensor slice_rows(const Tensor& t, std::size_t begin, std::size_t end) {
  const auto first = t.storage().begin() + static_cast<std::ptrdiff_t>(begin * t.cols());
  return Tensor({end - begin, t.cols()},
                std::vector<double>(first, first + static_cast<std::ptrdiff_t>(
                                                       (end - begin) * t.cols())));
}

}  // namespace

std::mt19937_64 seeded_stream(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

SpotAgent make_agent(const data::OfflineDataset& dataset,
                     std::shared_ptr<const cvae::BehaviorDensity> density,
                     const SpotConfig& config, std::uint64_t seed) {
  std::mt19937_64 init = seeded_stream(seed, 0);
  SpotAgent agent(dataset.state_dim(), cvae::bounds_for_env(dataset.env_name()),
                  config, std::move(density), init);
  agent.set_stats(stats_of(dataset));
  return agent;
}

UpdateStats update_step(SpotAgent& agent, const data::Batch& batch,
                        std::mt19937_64& rng) {
  UpdateStats out;
  const Tensor noise = sample_target_noise(agent, batch.size(), rng);
  out.critic_loss = critic_update(agent, batch, noise);
  if (agent.update_count() % agent.config().policy_freq == 0) {
    const Tensor density_noise =
        cvae::sample_density_noise(agent.density(), batch.size(), rng,
                                   agent.config().density_samples);
    std::vector<Tensor> masks;
    if (agent.config().actor_dropout > 0.0) {
      masks = autodiff::sample_dropout_masks(agent.actor().spec(), batch.size(),
                                             agent.config().actor_dropout, rng);
    }
    out.actor = actor_update(agent, batch, density_noise, masks);
    out.actor_updated = true;
  }
  return out;
}

void run_offline_steps(SpotAgent& agent, const data::OfflineDataset& dataset,
                       std::size_t steps, std::uint64_t seed, TrainLog& log) {
  if (dataset.state_dim() != agent.state_dim() ||
      dataset.action_dim() != agent.bounds().dim()) {
    throw DimensionError("dataset dims do not match the agent");
  }
  const SpotConfig& c = agent.config();
  const std::unique_ptr<envs::Env> env = envs::make_env(dataset.env_name());
  std::mt19937_64 rng = seeded_stream(seed, 1);
  const std::uint64_t eval_seed = seeded_stream(seed, 2)();
  const std::size_t batch_size = std::min(c.batch_size, dataset.size());

  double critic_sum = 0.0;
  std::size_t critic_n = 0;
  ActorUpdateResult last_actor;
  for (std::size_t i = 0; i < steps; ++i) {
    const data::Batch batch = data::sample_minibatch(dataset, batch_size, rng);
    const UpdateStats st = update_step(agent, batch, rng);
    critic_sum += st.critic_loss;
    ++critic_n;
    if (st.actor_updated) last_actor = st.actor;
    const std::size_t step = agent.update_count();
    if (step % c.log_interval == 0) {
      log.add({"train", step,
               {{"critic_loss", critic_sum / static_cast<double>(critic_n)},
                {"actor_loss", last_actor.loss},
                {"mean_q", last_actor.mean_q},
                {"mean_log_pb", last_actor.mean_log_density},
                {"alpha", last_actor.alpha},
                {"lambda", agent.lambda()}}});
      critic_sum = 0.0;
      critic_n = 0;
    }
    if (step % c.eval_interval == 0) {
      const PolicyEvaluation ev =
          evaluate(agent.policy(), *env, c.eval_episodes, eval_seed);
      std::mt19937_64 prng = seeded_stream(seed, 3 + step);
      const ProfileSummary prof = constraint_strength_profile(
          agent, dataset, {c.eval_profile_states, c.eval_profile_samples}, prng);
      log.add_eval({step, ev.mean_return, ev.normalized_score, ev.goal_rate,
                    prof.p5, agent.lambda()});
    }
  }
}

OfflineRun train_offline(const data::OfflineDataset& dataset,
                         std::shared_ptr<const cvae::BehaviorDensity> density,
                         const SpotConfig& config, std::uint64_t seed) {
  OfflineRun run{make_agent(dataset, std::move(density), config, seed), {}};
  run_offline_steps(run.agent, dataset, config.steps, seed, run.log);
  return run;
}

std::vector<std::size_t> profile_rows(const data::OfflineDataset& dataset,
                                      std::size_t num_states,
                                      std::mt19937_64& rng) {
  if (num_states == 0 || dataset.size() == 0) {
    throw ContractError("density profile needs at least one state");
  }
  std::vector<std::size_t> rows(dataset.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  if (num_states >= rows.size()) return rows;
  // Partial Fisher-Yates.
  for (std::size_t i = 0; i < num_states; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, rows.size() - 1);
    std::swap(rows[i], rows[pick(rng)]);
  }
  rows.resize(num_states);
  return rows;
}

ProfileSummary density_profile(const cvae::BehaviorDensity& density,
                               const Tensor& states, const Tensor& actions,
                               std::size_t num_samples, std::mt19937_64& rng) {
  if (states.rows() == 0) throw ContractError("density profile needs at least one state");
  ProfileSummary out;
  out.values.reserve(states.rows());
  for (std::size_t begin = 0; begin < states.rows(); begin += kProfileChunk) {
    const std::size_t end = std::min(begin + kProfileChunk, states.rows());
    const std::vector<double> v = density.estimate_log_density(
        slice_rows(states, begin, end), slice_rows(actions, begin, end),
        num_samples, rng);
    out.values.insert(out.values.end(), v.begin(), v.end());
  }
  out.p5 = percentile_nearest_rank(out.values, 5.0);
  out.p25 = percentile_nearest_rank(out.values, 25.0);
  out.p50 = percentile_nearest_rank(out.values, 50.0);
  return out;
}

ProfileSummary constraint_strength_profile(const DeterministicPolicy& policy,
                                           const cvae::BehaviorDensity& density,
                                           const data::OfflineDataset& dataset,
                                           const ProfileOptions& options,
                                           std::mt19937_64& rng) {
  const std::vector<std::size_t> rows = profile_rows(dataset, options.num_states, rng);
  const Tensor states = rows_of([&](std::size_t i) { return dataset.state(i); }, dataset.state_dim(), rows);
  return density_profile(density, states, policy.act(states), options.num_samples, rng);
}

ProfileSummary constraint_strength_profile(const SpotAgent& agent,
                                           const data::OfflineDataset& dataset,
                                           const ProfileOptions& options,
                                           std::mt19937_64& rng) {
  return constraint_strength_profile(agent.policy(), agent.density(), dataset,
                                     options, rng);
}

ProfileSummary behavior_profile(const cvae::BehaviorDensity& density,
                                const data::OfflineDataset& dataset,
                                const ProfileOptions& options,
                                std::mt19937_64& rng) {
  const std::vector<std::size_t> rows = profile_rows(dataset, options.num_states, rng);
  return density_profile(density,
                         rows_of([&](std::size_t i) { return dataset.state(i); }, dataset.state_dim(), rows),
                         rows_of([&](std::size_t i) { return dataset.action(i); }, dataset.action_dim(), rows),
                         options.num_samples, rng);
}

PolicyEvaluation evaluate(const DeterministicPolicy& policy, const envs::Env& env,
                          std::size_t episodes, std::uint64_t seed) {
  const envs::EvaluationSummary s =
      envs::evaluate_policy(env, policy.as_policy_fn(), episodes, seed);
  return {s.mean_return, envs::normalized_score(s.mean_return, env.spec().name),
          s.goal_rate};
}

void BcConfig::validate() const {
  if (hidden == 0 || layers == 0) throw ConfigError("bc network must be non-empty");
  if (!(lr > 0.0)) throw ConfigError("bc learning rate must be positive");
  if (batch_size == 0) throw ConfigError("bc batch_size must be positive");
}

BcRun bc_baseline(const data::OfflineDataset& dataset, const BcConfig& config,
                  std::uint64_t seed) {
  config.validate();
  if (dataset.size() == 0) throw ContractError("bc needs a non-empty dataset");
  std::mt19937_64 init = seeded_stream(seed, 0);
  std::mt19937_64 rng = seeded_stream(seed, 1);
  BcRun run{DeterministicPolicy{
                autodiff::Mlp(actor_spec(dataset.state_dim(), dataset.action_dim(),
                                         config.hidden, config.layers),
                              init),
                cvae::bounds_for_env(dataset.env_name()), stats_of(dataset)},
            {}};
  autodiff::AdamState adam = autodiff::AdamState::zeros_like(run.policy.net.params());
  const std::size_t batch_size = std::min(config.batch_size, dataset.size());
  run.loss_trace.reserve(config.steps);
  for (std::size_t i = 0; i < config.steps; ++i) {
    const data::Batch batch = data::sample_minibatch(dataset, batch_size, rng);
    autodiff::Graph g;
    const autodiff::BoundMlp net = run.policy.net.bind(g, true);
    const autodiff::Var a = squash_to_bounds(net.forward(g.constant(batch.states)),
                                             run.policy.bounds);
    const autodiff::Var loss =
        autodiff::mean(autodiff::square(a - g.constant(batch.actions)));
    g.backward(loss);
    autodiff::adam_step(run.policy.net.params(), g.grads(net.params), adam,
                        autodiff::AdamConfig{config.lr});
    const double value = loss.value().item();
    if (!std::isfinite(value)) throw NumericError("bc loss is not finite");
    run.loss_trace.push_back(value);
  }
  return run;
}

}  // namespace spot::agent
