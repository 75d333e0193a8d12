#include "spot/agent/spot_agent.hpp"

#include <algorithm>
#include <cmath>

#include "spot/autodiff/ops.hpp"
#include "spot/errors.hpp"

namespace spot::agent {

using autodiff::BoundMlp;
using autodiff::Graph;
using autodiff::Mlp;
using autodiff::NamedTensor;
using autodiff::Tensor;
using autodiff::Var;

namespace {

Mlp make_critic(std::size_t state_dim, std::size_t action_dim,
                const SpotConfig& c, std::mt19937_64& rng) {
  return Mlp(autodiff::make_mlp_spec(state_dim + action_dim, c.hidden, c.layers, 1),
             rng);
}

Tensor concat(const Tensor& a, const Tensor& b) {
  Tensor out(a.rows(), a.cols() + b.cols());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    auto dst = out.row_span(r);
    std::ranges::copy(a.row_span(r), dst.begin());
    std::ranges::copy(b.row_span(r), dst.begin() + a.cols());
  }
  return out;
}

// Config scalars in a fixed order for checkpoints.
std::vector<double> config_values(const SpotConfig& c) {
  return {static_cast<double>(c.hidden),
          static_cast<double>(c.layers),
          c.actor_lr,
          c.critic_lr,
          static_cast<double>(c.batch_size),
          c.discount,
          c.tau,
          c.policy_noise,
          c.noise_clip,
          static_cast<double>(c.policy_freq),
          c.lambda,
          c.q_norm ? 1.0 : 0.0,
          c.actor_dropout,
          static_cast<double>(c.steps),
          static_cast<double>(c.eval_interval),
          static_cast<double>(c.eval_episodes),
          static_cast<double>(c.log_interval),
          static_cast<double>(c.eval_profile_states),
          static_cast<double>(c.eval_profile_samples),
          static_cast<double>(c.density_samples)};
}

SpotConfig config_from_values(const Tensor& t) {
  if (t.size() != 20) throw FormatError("malformed agent config tensor");
  const auto u = [&](std::size_t i) {
    return static_cast<std::size_t>(std::llround(t[i]));
  };
  SpotConfig c;
  c.hidden = u(0);
  c.layers = u(1);
  c.actor_lr = t[2];
  c.critic_lr = t[3];
  c.batch_size = u(4);
  c.discount = t[5];
  c.tau = t[6];
  c.policy_noise = t[7];
  c.noise_clip = t[8];
  c.policy_freq = u(9);
  c.lambda = t[10];
  c.q_norm = t[11] != 0.0;
  c.actor_dropout = t[12];
  c.steps = u(13);
  c.eval_interval = u(14);
  c.eval_episodes = u(15);
  c.log_interval = u(16);
  c.eval_profile_states = u(17);
  c.eval_profile_samples = u(18);
  c.density_samples = u(19);
  return c;
}

void push_mlp(std::vector<NamedTensor>& out, const Mlp& net,
              const std::string& name) {
  const auto names = net.param_names(name);
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.push_back({names[i], net.params()[i]});
  }
}

Mlp read_mlp(const std::vector<NamedTensor>& ts, const std::string& name,
             autodiff::MlpSpec spec) {
  std::vector<Tensor> params;
  for (std::size_t i = 0; i < spec.num_layers(); ++i) {
    params.push_back(autodiff::find_tensor(ts, name + ".w" + std::to_string(i)));
    params.push_back(autodiff::find_tensor(ts, name + ".b" + std::to_string(i)));
  }
  return Mlp(std::move(spec), std::move(params));
}

void push_adam(std::vector<NamedTensor>& out, const autodiff::AdamState& s,
               const std::string& name) {
  out.push_back({name + ".step", Tensor::scalar(static_cast<double>(s.step))});
  for (std::size_t i = 0; i < s.m.size(); ++i) {
    out.push_back({name + ".m" + std::to_string(i), s.m[i]});
    out.push_back({name + ".v" + std::to_string(i), s.v[i]});
  }
}

autodiff::AdamState read_adam(const std::vector<NamedTensor>& ts,
                              const std::string& name, std::size_t count) {
  autodiff::AdamState s;
  s.step = std::llround(autodiff::find_tensor(ts, name + ".step").item());
  for (std::size_t i = 0; i < count; ++i) {
    s.m.push_back(autodiff::find_tensor(ts, name + ".m" + std::to_string(i)));
    s.v.push_back(autodiff::find_tensor(ts, name + ".v" + std::to_string(i)));
  }
  return s;
}

}  // namespace

void SpotConfig::validate() const {
  const auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (hidden == 0 || layers == 0) fail("network hidden width and layers must be positive");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) fail("learning rates must be positive");
  if (batch_size == 0) fail("batch_size must be positive");
  if (!(discount >= 0.0 && discount < 1.0)) fail("discount must lie in [0, 1)");
  if (!(tau >= 0.0 && tau <= 1.0)) fail("tau must lie in [0, 1]");
  if (!(policy_noise >= 0.0) || !(noise_clip >= 0.0)) fail("policy noise and clip must be >= 0");
  if (policy_freq == 0) fail("policy_freq must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail("lambda must be a finite value >= 0");
  if (!(actor_dropout >= 0.0 && actor_dropout < 1.0)) fail("actor_dropout must lie in [0, 1)");
  if (eval_interval == 0 || log_interval == 0) fail("eval and log intervals must be positive");
  if (density_samples == 0) fail("density_samples must be positive");
}

SpotConfig default_spot_config(envs::RewardKind kind) {
  SpotConfig c;
  if (kind == envs::RewardKind::kDense) {
    c.actor_lr = 3e-4;
    c.actor_dropout = 0.1;
    c.eval_episodes = 10;
  } else {
    c.actor_lr = 1e-4;
    c.actor_dropout = 0.0;
    c.eval_episodes = 20;
  }
  return c;
}

std::vector<double> default_lambda_grid(envs::RewardKind kind) {
  if (kind == envs::RewardKind::kDense) return {0.05, 0.1, 0.2, 0.5, 1.0, 2.0};
  return {0.025, 0.05, 0.1, 0.25, 0.5, 1.0};
}

SpotAgent::SpotAgent(std::size_t state_dim, ActionBounds bounds,
                     SpotConfig config,
                     std::shared_ptr<const cvae::BehaviorDensity> density,
                     std::mt19937_64& init_rng)
    : state_dim_(state_dim), bounds_(std::move(bounds)),
      config_(std::move(config)), density_(std::move(density)) {
  config_.validate();
  bounds_.validate();
  if (!density_) throw ContractError("SpotAgent needs a behavior density model");
  if (density_->state_dim() != state_dim_ || density_->action_dim() != bounds_.dim()) {
    throw DimensionError("density model dims do not match the agent");
  }
  const std::size_t ad = bounds_.dim();
  actor_ = Mlp(actor_spec(state_dim_, ad, config_.hidden, config_.layers), init_rng);
  actor_target_ = actor_;
  for (int i = 0; i < 2; ++i) {
    critics_[i] = make_critic(state_dim_, ad, config_, init_rng);
    critic_targets_[i] = critics_[i];
    critic_adam_[i] = autodiff::AdamState::zeros_like(critics_[i].params());
  }
  actor_adam_ = autodiff::AdamState::zeros_like(actor_.params());
}

void SpotAgent::set_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw ConfigError("lambda must be a finite value >= 0");
  }
  config_.lambda = lambda;
}

Tensor SpotAgent::act(const Tensor& states) const {
  return squash_to_bounds(actor_.predict(states), bounds_);
}

Tensor SpotAgent::act_target(const Tensor& states) const {
  return squash_to_bounds(actor_target_.predict(states), bounds_);
}

DeterministicPolicy SpotAgent::policy() const {
  return DeterministicPolicy{actor_, bounds_, stats_};
}

std::vector<NamedTensor> SpotAgent::to_tensors() const {
  std::vector<NamedTensor> out;
  out.push_back({"agent.state_dim", Tensor::scalar(static_cast<double>(state_dim_))});
  out.push_back({"agent.action_low", Tensor::row(bounds_.low)});
  out.push_back({"agent.action_high", Tensor::row(bounds_.high)});
  out.push_back({"agent.config", Tensor::row(config_values(config_))});
  out.push_back({"agent.update_count",
                 Tensor::scalar(static_cast<double>(update_count_))});
  if (stats_) {
    out.push_back({"agent.stats_mean", Tensor::row(stats_->mean)});
    out.push_back({"agent.stats_std", Tensor::row(stats_->std)});
  }
  push_mlp(out, actor_, "actor");
  push_mlp(out, actor_target_, "actor_target");
  for (int i = 0; i < 2; ++i) {
    push_mlp(out, critics_[i], "critic" + std::to_string(i + 1));
    push_mlp(out, critic_targets_[i], "critic_target" + std::to_string(i + 1));
    push_adam(out, critic_adam_[i], "adam.critic" + std::to_string(i + 1));
  }
  push_adam(out, actor_adam_, "adam.actor");
  for (NamedTensor& t : density_->to_tensors("density.")) out.push_back(std::move(t));
  return out;
}

SpotAgent SpotAgent::from_tensors(const std::vector<NamedTensor>& ts) {
  using autodiff::find_tensor;
  SpotAgent a;
  a.state_dim_ = static_cast<std::size_t>(
      std::llround(find_tensor(ts, "agent.state_dim").item()));
  a.bounds_ = ActionBounds{find_tensor(ts, "agent.action_low").storage(),
                           find_tensor(ts, "agent.action_high").storage()};
  a.bounds_.validate();
  a.config_ = config_from_values(find_tensor(ts, "agent.config"));
  a.config_.validate();
  a.update_count_ = static_cast<std::size_t>(
      std::llround(find_tensor(ts, "agent.update_count").item()));
  const bool has_stats = std::any_of(ts.begin(), ts.end(), [](const NamedTensor& t) {
    return t.name == "agent.stats_mean";
  });
  if (has_stats) {
    a.stats_ = data::NormalizationStats{find_tensor(ts, "agent.stats_mean").storage(),
                                        find_tensor(ts, "agent.stats_std").storage()};
  }
  const std::size_t ad = a.bounds_.dim();
  const auto aspec = actor_spec(a.state_dim_, ad, a.config_.hidden, a.config_.layers);
  const auto cspec = autodiff::make_mlp_spec(a.state_dim_ + ad, a.config_.hidden,
                                             a.config_.layers, 1);
  a.actor_ = read_mlp(ts, "actor", aspec);
  a.actor_target_ = read_mlp(ts, "actor_target", aspec);
  for (int i = 0; i < 2; ++i) {
    const std::string k = std::to_string(i + 1);
    a.critics_[i] = read_mlp(ts, "critic" + k, cspec);
    a.critic_targets_[i] = read_mlp(ts, "critic_target" + k, cspec);
    a.critic_adam_[i] = read_adam(ts, "adam.critic" + k, cspec.num_layers() * 2);
  }
  a.actor_adam_ = read_adam(ts, "adam.actor", aspec.num_layers() * 2);
  a.density_ = cvae::density_from_tensors(ts, "density.");
  if (a.density_->state_dim() != a.state_dim_ || a.density_->action_dim() != ad) {
    throw DimensionError("stored density model dims do not match the agent");
  }
  return a;
}

bool SpotAgent::same_parameters(const SpotAgent& o) const {
  return actor_ == o.actor_ && actor_target_ == o.actor_target_ &&
         critics_[0] == o.critics_[0] && critics_[1] == o.critics_[1] &&
         critic_targets_[0] == o.critic_targets_[0] &&
         critic_targets_[1] == o.critic_targets_[1];
}

void save_agent(const std::filesystem::path& path, const SpotAgent& agent) {
  autodiff::save_checkpoint(path, agent.to_tensors());
}

SpotAgent load_agent(const std::filesystem::path& path) {
  return SpotAgent::from_tensors(autodiff::load_checkpoint(path));
}

Tensor sample_target_noise(const SpotAgent& agent, std::size_t rows,
                           std::mt19937_64& rng) {
  const ActionBounds& b = agent.bounds();
  const std::size_t ad = b.dim();
  Tensor noise(rows, ad);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t j = 0; j < ad; ++j) {
      const double half = 0.5 * (b.high[j] - b.low[j]);
      const double limit = agent.config().noise_clip * half;
      noise(r, j) = std::clamp(agent.config().policy_noise * half * normal(rng),
                               -limit, limit);
    }
  }
  return noise;
}

Tensor critic_target(const SpotAgent& agent, const data::Batch& batch,
                     const Tensor& noise) {
  Tensor next_a = agent.act_target(batch.next_states);
  if (noise.shape() != next_a.shape()) {
    throw ShapeError("critic_target: noise shape " + autodiff::to_string(noise.shape()) +
                     " vs actions " + autodiff::to_string(next_a.shape()));
  }
  for (std::size_t i = 0; i < next_a.size(); ++i) next_a[i] += noise[i];
  clip_to_bounds(next_a, agent.bounds());
  const Tensor in = concat(batch.next_states, next_a);
  const Tensor q1 = agent.critic_target(0).predict(in);
  const Tensor q2 = agent.critic_target(1).predict(in);
  const double gamma = agent.config().discount;
  Tensor y(batch.size(), 1);
  for (std::size_t i = 0; i < y.size(); ++i) {
    y[i] = batch.rewards[i] + gamma * (1.0 - batch.dones[i]) * std::min(q1[i], q2[i]);
  }
  if (!y.all_finite()) throw NumericError("critic_target: non-finite target");
  return y;
}

Var critic_loss(const BoundMlp& q1, const BoundMlp& q2, Var states, Var actions,
                const Tensor& y) {
  using namespace autodiff;
  Graph& g = states.graph();
  const Var in = concat_cols(states, actions);
  const Var target = g.constant(y);
  return mean(square(q1.forward(in) - target)) +
         mean(square(q2.forward(in) - target));
}

double critic_update(SpotAgent& agent, const data::Batch& batch,
                     const Tensor& noise) {
  const Tensor y = critic_target(agent, batch, noise);
  Graph g;
  const BoundMlp q1 = agent.critic(0).bind(g, true);
  const BoundMlp q2 = agent.critic(1).bind(g, true);
  const Var loss = critic_loss(q1, q2, g.constant(batch.states),
                               g.constant(batch.actions), y);
  g.backward(loss);
  const autodiff::AdamConfig adam{agent.config().critic_lr};
  autodiff::adam_step(agent.critic(0).params(), g.grads(q1.params),
                      agent.critic_adam(0), adam);
  autodiff::adam_step(agent.critic(1).params(), g.grads(q2.params),
                      agent.critic_adam(1), adam);
  agent.count_update();
  return loss.value().item();
}

double q_normalizer(std::span<const double> q_values, bool enabled) {
  if (!enabled) return 1.0;
  if (q_values.empty()) throw ContractError("q_normalizer: empty batch");
  double total = 0.0;
  for (double q : q_values) total += std::abs(q);
  return std::max(total / static_cast<double>(q_values.size()), 1e-8);
}

double q_normalizer(const SpotAgent& agent, const data::Batch& batch) {
  const Tensor a = agent.act(batch.states);
  const Tensor q = agent.critic(0).predict(concat(batch.states, a));
  return q_normalizer(q.data(), agent.config().q_norm);
}

ActorLoss actor_loss(const SpotAgent& agent, const BoundMlp& actor, Var states,
                     const Tensor& density_noise,
                     std::span<const Tensor> dropout_masks, double lambda,
                     std::optional<double> alpha) {
  using namespace autodiff;
  Graph& g = states.graph();
  const Var a = squash_to_bounds(actor.forward(states, dropout_masks), agent.bounds());
  const BoundMlp critic = agent.critic(0).bind(g, false);
  ActorLoss out;
  out.q = critic.forward(concat_cols(states, a));
  out.alpha = alpha ? *alpha : q_normalizer(out.q.value().data(), agent.config().q_norm);
  out.log_density = agent.density().log_density_samples(
      g, states, a, density_noise, agent.config().density_samples);
  out.loss = scale(mean(out.q), -1.0 / out.alpha) -
             scale(mean(out.log_density), lambda);
  return out;
}

void update_targets(SpotAgent& agent) {
  const double tau = agent.config().tau;
  autodiff::polyak_update(agent.actor(), agent.actor_target(), tau);
  autodiff::polyak_update(agent.critic(0), agent.critic_target(0), tau);
  autodiff::polyak_update(agent.critic(1), agent.critic_target(1), tau);
}

ActorUpdateResult actor_update(SpotAgent& agent, const data::Batch& batch,
                               const Tensor& density_noise,
                               std::span<const Tensor> dropout_masks) {
  Graph g;
  const BoundMlp actor = agent.actor().bind(g, true);
  const ActorLoss parts = actor_loss(agent, actor, g.constant(batch.states),
                                     density_noise, dropout_masks, agent.lambda());
  g.backward(parts.loss);
  autodiff::adam_step(agent.actor().params(), g.grads(actor.params),
                      agent.actor_adam(), autodiff::AdamConfig{agent.config().actor_lr});
  update_targets(agent);
  ActorUpdateResult r;
  r.loss = parts.loss.value().item();
  r.alpha = parts.alpha;
  double q = 0.0;
  for (double v : parts.q.value().data()) q += v;
  double lp = 0.0;
  for (double v : parts.log_density.value().data()) lp += v;
  r.mean_q = q / static_cast<double>(batch.size());
  r.mean_log_density = lp / static_cast<double>(batch.size());
  return r;
}

}  // namespace spot::agent
