#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <memory>
#include <random>

#include "spot/agent/spot_agent.hpp"
#include "spot/agent/train.hpp"
#include "spot/autodiff/ops.hpp"
#include "spot/cvae/cvae.hpp"
#include "spot/errors.hpp"
#include "support/finite_difference.hpp"

namespace {

using namespace spot;
using namespace spot::agent;
using autodiff::Graph;
using autodiff::Tensor;
using autodiff::Var;
using spot::testing::central_difference;
using spot::testing::relative_error;

Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng,
                     double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Tensor t(rows, cols);
  for (double& x : t.data()) x = dist(rng);
  return t;
}

ActionBounds box(std::size_t dim, double half) {
  return ActionBounds{std::vector<double>(dim, -half), std::vector<double>(dim, half)};
}

std::shared_ptr<const cvae::CvaeModel> random_density(std::size_t sd,
                                                      const ActionBounds& b,
                                                      std::mt19937_64& rng) {
  cvae::CvaeConfig c;
  c.hidden = 8;
  c.layers = 2;
  return std::make_shared<const cvae::CvaeModel>(sd, b, c, rng);
}

SpotConfig small_config() {
  SpotConfig c;
  c.hidden = 8;
  c.layers = 2;
  c.batch_size = 16;
  return c;
}

SpotAgent small_agent(std::size_t sd, std::size_t ad, std::uint64_t seed,
                      SpotConfig config = small_config()) {
  std::mt19937_64 rng(seed);
  const ActionBounds b = box(ad, 1.5);
  return SpotAgent(sd, b, config, random_density(sd, b, rng), rng);
}

data::Batch random_batch(std::size_t n, std::size_t sd, std::size_t ad,
                         std::mt19937_64& rng) {
  data::Batch b;
  b.states = random_tensor(n, sd, rng);
  b.actions = random_tensor(n, ad, rng, 0.5);
  b.rewards = random_tensor(n, 1, rng);
  b.next_states = random_tensor(n, sd, rng);
  b.dones = Tensor(n, 1);
  for (std::size_t i = 0; i < n; i += 3) b.dones[i] = 1.0;
  return b;
}

Tensor scalar_param(double v) { return Tensor::scalar(v); }
Tensor col(double a, double b) { return Tensor({2, 1}, {a, b}); }

TEST(QNormalizer, MeanAbsoluteValue) {
  const std::vector<double> q = {1.0, -2.0, 3.0};
  EXPECT_DOUBLE_EQ(q_normalizer(q, true), 2.0);
}

TEST(QNormalizer, DisabledIsOne) {
  const std::vector<double> q = {1.0, -2.0, 3.0};
  EXPECT_EQ(q_normalizer(q, false), 1.0);
}

TEST(QNormalizer, AllZeroHitsFloor) {
  const std::vector<double> q(5, 0.0);
  EXPECT_EQ(q_normalizer(q, true), 1e-8);
}

TEST(SpotConfig, RejectsNegativeLambda) {
  SpotConfig c;
  c.lambda = -0.1;
  EXPECT_THROW(c.validate(), ConfigError);
  SpotAgent agent = small_agent(2, 1, 1);
  EXPECT_THROW(agent.set_lambda(-1.0), ConfigError);
}

TEST(SpotConfig, DefaultsFollowRewardKind) {
  const SpotConfig dense = default_spot_config(envs::RewardKind::kDense);
  const SpotConfig sparse = default_spot_config(envs::RewardKind::kSparse);
  EXPECT_EQ(dense.actor_lr, 3e-4);
  EXPECT_EQ(dense.actor_dropout, 0.1);
  EXPECT_EQ(sparse.actor_lr, 1e-4);
  EXPECT_EQ(sparse.actor_dropout, 0.0);
  EXPECT_EQ(dense.tau, 0.005);
  EXPECT_EQ(dense.discount, 0.99);
  EXPECT_EQ(dense.policy_noise, 0.2);
  EXPECT_EQ(dense.noise_clip, 0.5);
  EXPECT_EQ(dense.policy_freq, 2u);
  EXPECT_EQ(default_lambda_grid(envs::RewardKind::kDense),
            (std::vector<double>{0.05, 0.1, 0.2, 0.5, 1.0, 2.0}));
  EXPECT_EQ(default_lambda_grid(envs::RewardKind::kSparse),
            (std::vector<double>{0.025, 0.05, 0.1, 0.25, 0.5, 1.0}));
}

TEST(CriticTarget, TerminalIsReward) {
  SpotAgent agent = small_agent(3, 2, 2);
  std::mt19937_64 rng(5);
  data::Batch b = random_batch(6, 3, 2, rng);
  b.dones.fill(1.0);
  const Tensor y = critic_target(agent, b, sample_target_noise(agent, 6, rng));
  for (std::size_t i = 0; i < 6; ++i) EXPECT_EQ(y[i], b.rewards[i]);
}

TEST(CriticTarget, IdenticalTwinsAndZeroNoise) {
  SpotAgent agent = small_agent(3, 2, 3);
  agent.critic_target(1) = agent.critic_target(0);
  std::mt19937_64 rng(6);
  data::Batch b = random_batch(6, 3, 2, rng);
  const Tensor y = critic_target(agent, b, Tensor(6, 2));
  const Tensor a = agent.act_target(b.next_states);
  for (std::size_t i = 0; i < 6; ++i) {
    Tensor in(1, 5);
    for (int j = 0; j < 3; ++j) in[j] = b.next_states(i, j);
    for (int j = 0; j < 2; ++j) in[3 + j] = a(i, j);
    const double q = agent.critic_target(0).predict(in).item();
    EXPECT_NEAR(y[i], b.rewards[i] + 0.99 * (1.0 - b.dones[i]) * q, 1e-12);
  }
}

TEST(CriticTarget, MatchesHandEvaluationOfTinyNetworks) {
  SpotConfig c = small_config();
  c.hidden = 1;
  std::mt19937_64 rng(7);
  const ActionBounds b = box(1, 2.0);
  SpotAgent agent(1, b, c, random_density(1, b, rng), rng);
  agent.actor_target().params() = {scalar_param(0.5), scalar_param(0.1),
                                   scalar_param(2.0), scalar_param(-0.3)};
  agent.critic_target(0).params() = {col(1.0, -0.5), scalar_param(0.2),
                                     scalar_param(1.5), scalar_param(0.05)};
  agent.critic_target(1).params() = {col(-0.3, 0.8), scalar_param(0.1),
                                     scalar_param(-1.0), scalar_param(0.4)};
  data::Batch batch;
  batch.states = Tensor::scalar(0.0);
  batch.actions = Tensor::scalar(0.0);
  batch.rewards = Tensor::scalar(0.25);
  batch.next_states = Tensor::scalar(0.4);
  batch.dones = Tensor::scalar(0.0);

  const double s = 0.4;
  const double h = std::max(0.0, 0.5 * s + 0.1);
  const double a = std::clamp(2.0 * std::tanh(2.0 * h - 0.3) + 0.1, -2.0, 2.0);
  const double q1 = 1.5 * std::max(0.0, 1.0 * s - 0.5 * a + 0.2) + 0.05;
  const double q2 = -1.0 * std::max(0.0, -0.3 * s + 0.8 * a + 0.1) + 0.4;
  const double expected = 0.25 + 0.99 * std::min(q1, q2);

  const Tensor y = critic_target(agent, batch, Tensor::scalar(0.1));
  EXPECT_NEAR(y.item(), expected, 1e-14);
}

TEST(CriticTarget, NoiseIsClippedToFractionOfHalfRange) {
  SpotAgent agent = small_agent(2, 3, 8);
  std::mt19937_64 rng(9);
  const Tensor n = sample_target_noise(agent, 2000, rng);
  double sq = 0.0;
  for (double x : n.data()) {
    EXPECT_LE(std::abs(x), 0.5 * 1.5);
    sq += x * x;
  }
  // Clipping at 2.5 sigma barely shrinks the spread.
  EXPECT_NEAR(std::sqrt(sq / n.size()), 0.2 * 1.5, 0.01);
}

TEST(CriticUpdate, LossIsNonNegativeAndLeavesTargetsAlone) {
  SpotAgent agent = small_agent(3, 2, 10);
  const SpotAgent before = agent;
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const data::Batch b = random_batch(8, 3, 2, rng);
    EXPECT_GE(critic_update(agent, b, sample_target_noise(agent, 8, rng)), 0.0);
  }
  EXPECT_EQ(agent.actor(), before.actor());
  EXPECT_EQ(agent.actor_target(), before.actor_target());
  EXPECT_EQ(agent.critic_target(0), before.critic_target(0));
  EXPECT_EQ(agent.critic_target(1), before.critic_target(1));
  EXPECT_NE(agent.critic(0), before.critic(0));
  EXPECT_EQ(agent.update_count(), 20u);
}

TEST(CriticUpdate, ReplayIsBitwiseReproducible) {
  SpotAgent a = small_agent(3, 2, 12);
  SpotAgent b = a;
  std::mt19937_64 rng(13);
  for (int i = 0; i < 5; ++i) {
    const data::Batch batch = random_batch(8, 3, 2, rng);
    const Tensor noise = sample_target_noise(a, 8, rng);
    EXPECT_EQ(critic_update(a, batch, noise), critic_update(b, batch, noise));
  }
  EXPECT_TRUE(a.same_parameters(b));
}

TEST(CriticUpdate, MemorizedTransitionBarelyMoves) {
  SpotConfig c = small_config();
  c.critic_lr = 1e-3;
  SpotAgent agent = small_agent(2, 1, 14, c);
  data::Batch batch;
  batch.states = Tensor::row({0.3, -0.2});
  batch.actions = Tensor::scalar(0.4);
  batch.rewards = Tensor::scalar(0.7);
  batch.next_states = Tensor::row({0.1, 0.5});
  batch.dones = Tensor::scalar(1.0);
  const Tensor zero = Tensor::scalar(0.0);
  for (int i = 0; i < 20'000; ++i) critic_update(agent, batch, zero);
  const SpotAgent before = agent;
  const double loss = critic_update(agent, batch, zero);
  EXPECT_LT(loss, 1e-10);
  for (int k = 0; k < 2; ++k) {
    for (std::size_t p = 0; p < before.critic(k).params().size(); ++p) {
      const Tensor& x = before.critic(k).params()[p];
      const Tensor& y = agent.critic(k).params()[p];
      for (std::size_t i = 0; i < x.size(); ++i) EXPECT_LT(std::abs(x[i] - y[i]), 1e-6);
    }
  }
}

TEST(CriticLoss, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 5; ++trial) {
    SpotAgent agent = small_agent(3, 2, 100 + trial);
    const data::Batch b = random_batch(7, 3, 2, rng);
    const Tensor y = critic_target(agent, b, sample_target_noise(agent, 7, rng));
    std::vector<Tensor> params = agent.critic(0).params();
    for (const Tensor& t : agent.critic(1).params()) params.push_back(t);
    const std::size_t n0 = agent.critic(0).params().size();
    auto run = [&](bool grads) {
      autodiff::Mlp c0(agent.critic(0).spec(),
                       std::vector<Tensor>(params.begin(), params.begin() + n0));
      autodiff::Mlp c1(agent.critic(1).spec(),
                       std::vector<Tensor>(params.begin() + n0, params.end()));
      Graph g;
      const auto q1 = c0.bind(g, true);
      const auto q2 = c1.bind(g, true);
      const Var loss =
          critic_loss(q1, q2, g.constant(b.states), g.constant(b.actions), y);
      std::vector<Tensor> out;
      if (grads) {
        g.backward(loss);
        out = g.grads(q1.params);
        for (const Tensor& t : g.grads(q2.params)) out.push_back(t);
      }
      return std::make_pair(loss.value().item(), out);
    };
    const auto analytic = run(true).second;
    const auto numeric = central_difference(params, [&] { return run(false).first; });
    EXPECT_LT(relative_error(analytic, numeric), 1e-4);
  }
}

TEST(ActorLoss, GradientThroughCriticAndDensityMatchesFiniteDifferences) {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 5; ++trial) {
    SpotConfig c = small_config();
    c.actor_dropout = 0.1;
    SpotAgent agent = small_agent(3, 2, 200 + trial, c);
    const Tensor states = random_tensor(6, 3, rng);
    const Tensor noise = cvae::sample_density_noise(agent.density(), 6, rng);
    const auto masks =
        autodiff::sample_dropout_masks(agent.actor().spec(), 6, 0.1, rng);
    const double alpha = q_normalizer(agent, data::Batch{states, {}, {}, {}, {}});
    std::vector<Tensor> params = agent.actor().params();
    auto run = [&](bool grads) {
      autodiff::Mlp actor(agent.actor().spec(), params);
      Graph g;
      const auto bound = actor.bind(g, true);
      const ActorLoss l =
          actor_loss(agent, bound, g.constant(states), noise, masks, 0.7, alpha);
      std::vector<Tensor> out;
      if (grads) {
        g.backward(l.loss);
        out = g.grads(bound.params);
      }
      return std::make_pair(l.loss.value().item(), out);
    };
    const auto analytic = run(true).second;
    const auto numeric = central_difference(params, [&] { return run(false).first; });
    EXPECT_LT(relative_error(analytic, numeric), 1e-4);
  }
}

struct Td3Actor {
  double alpha;
  double loss;
  std::vector<Tensor> grads;
};

// Normalized TD3 actor objective, built independently of actor_loss. The
// normalizer comes from the same (dropout) forward pass.
Td3Actor td3_actor_gradient(const SpotAgent& agent, const Tensor& states,
                            std::span<const Tensor> masks) {
  Graph g;
  const auto actor = agent.actor().bind(g, true);
  const auto critic = agent.critic(0).bind(g, false);
  const Var s = g.constant(states);
  const Var a = squash_to_bounds(actor.forward(s, masks), agent.bounds());
  const Var q = critic.forward(autodiff::concat_cols(s, a));
  double alpha = 0.0;
  for (double v : q.value().data()) alpha += std::abs(v);
  alpha = std::max(alpha / static_cast<double>(states.rows()), 1e-8);
  const Var loss = autodiff::scale(autodiff::mean(q), -1.0 / alpha);
  g.backward(loss);
  return {alpha, loss.value().item(), g.grads(actor.params)};
}

TEST(ActorLoss, ZeroLambdaIsNormalizedTd3Bitwise) {
  std::mt19937_64 rng(17);
  SpotConfig c = small_config();
  c.lambda = 0.0;
  c.actor_dropout = 0.1;
  SpotAgent agent = small_agent(3, 2, 18, c);
  for (int step = 0; step < 10; ++step) {
    const data::Batch b = random_batch(8, 3, 2, rng);
    critic_update(agent, b, sample_target_noise(agent, 8, rng));
    const Tensor noise = cvae::sample_density_noise(agent.density(), 8, rng);
    const auto masks = autodiff::sample_dropout_masks(agent.actor().spec(), 8, 0.1, rng);

    Graph g;
    const auto actor = agent.actor().bind(g, true);
    const ActorLoss l = actor_loss(agent, actor, g.constant(b.states), noise, masks, 0.0);
    g.backward(l.loss);
    const Td3Actor td3 = td3_actor_gradient(agent, b.states, masks);
    EXPECT_EQ(l.alpha, td3.alpha);
    EXPECT_EQ(l.loss.value().item(), td3.loss);
    EXPECT_TRUE(g.grads(actor.params) == td3.grads);
    actor_update(agent, b, noise, masks);
  }
}

TEST(ActorUpdate, TargetsTakeExactPolyakStep) {
  SpotAgent agent = small_agent(3, 2, 19);
  std::mt19937_64 rng(20);
  const data::Batch b = random_batch(8, 3, 2, rng);
  critic_update(agent, b, sample_target_noise(agent, 8, rng));
  const SpotAgent before = agent;
  actor_update(agent, b, cvae::sample_density_noise(agent.density(), 8, rng), {});
  const double tau = agent.config().tau;
  auto check = [&](const autodiff::Mlp& online, const autodiff::Mlp& old_target,
                   const autodiff::Mlp& new_target) {
    for (std::size_t p = 0; p < online.params().size(); ++p) {
      for (std::size_t i = 0; i < online.params()[p].size(); ++i) {
        const double expected =
            tau * online.params()[p][i] + (1.0 - tau) * old_target.params()[p][i];
        ASSERT_EQ(new_target.params()[p][i], expected);
      }
    }
  };
  EXPECT_NE(agent.actor(), before.actor());
  check(agent.actor(), before.actor_target(), agent.actor_target());
  check(agent.critic(0), before.critic_target(0), agent.critic_target(0));
  check(agent.critic(1), before.critic_target(1), agent.critic_target(1));
  // Critics are frozen during the actor step.
  EXPECT_EQ(agent.critic(0), before.critic(0));
}

TEST(ActorUpdate, HugeLambdaPullsActionsToBehaviorMode) {
  // Narrow unimodal behavior policy: a = 0.5 + N(0, 0.05^2) for every state.
  std::mt19937_64 rng(21);
  const std::size_t n = 4000;
  Tensor s(n, 2), a(n, 1);
  std::normal_distribution<double> noise(0.0, 0.05);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    s(i, 0) = u(rng);
    s(i, 1) = u(rng);
    a[i] = 0.5 + noise(rng);
  }
  const ActionBounds bounds = box(1, 1.0);
  cvae::CvaeConfig vc;
  vc.hidden = 32;
  vc.iterations = 3000;
  const auto vae = cvae::train_vae(s, a, bounds, vc, 3);
  double mode = 0.0, var = 0.0;
  for (double x : a.data()) mode += x / n;
  for (double x : a.data()) var += (x - mode) * (x - mode) / n;

  SpotConfig c = small_config();
  c.hidden = 32;
  c.lambda = 100.0;
  c.batch_size = 64;
  std::mt19937_64 init(22);
  SpotAgent agent(2, bounds, c, std::make_shared<cvae::CvaeModel>(vae.model), init);
  const double start = agent.act(s).storage()[0];
  for (int step = 0; step < 1000; ++step) {
    data::Batch b;
    b.states = Tensor(c.batch_size, 2);
    for (double& x : b.states.data()) x = u(rng);
    actor_update(agent, b, cvae::sample_density_noise(agent.density(), c.batch_size, rng), {});
  }
  const Tensor acts = agent.act(s);
  double mean_action = 0.0;
  for (double x : acts.data()) mean_action += x / n;
  EXPECT_LT(std::abs(mean_action - mode), 2.0 * std::sqrt(var))
      << "start " << start << " end " << mean_action;
}

TEST(SpotAgent, SaveLoadRoundTrip) {
  SpotAgent agent = small_agent(3, 2, 23);
  std::mt19937_64 rng(24);
  for (int i = 0; i < 6; ++i) {
    const data::Batch b = random_batch(8, 3, 2, rng);
    update_step(agent, b, rng);
  }
  agent.set_stats(data::NormalizationStats{{0.1, 0.2, 0.3}, {1.0, 2.0, 3.0}});
  const auto path = std::filesystem::temp_directory_path() / "spot_agent_test.ckpt";
  save_agent(path, agent);
  const SpotAgent loaded = load_agent(path);
  std::filesystem::remove(path);
  EXPECT_TRUE(loaded.same_parameters(agent));
  EXPECT_EQ(loaded.to_tensors(), agent.to_tensors());
  EXPECT_EQ(loaded.update_count(), agent.update_count());
  EXPECT_EQ(loaded.stats(), agent.stats());
}

TEST(DeterministicPolicy, SaveLoadRoundTripAndBadShape) {
  SpotAgent agent = small_agent(3, 2, 25);
  agent.set_stats(data::NormalizationStats{{0.5, -0.5, 0.0}, {2.0, 1.0, 4.0}});
  const DeterministicPolicy policy = agent.policy();
  const auto path = std::filesystem::temp_directory_path() / "spot_policy_test.ckpt";
  save_policy(path, policy);
  const DeterministicPolicy loaded = load_policy(path);
  std::filesystem::remove(path);
  EXPECT_TRUE(loaded == policy);
  const std::vector<double> obs = {0.3, -1.2, 2.0};
  EXPECT_EQ(loaded.act_raw(obs), policy.act_raw(obs));

  auto tensors = policy.to_tensors();
  for (auto& t : tensors) {
    if (t.name == "policy.shape") t.value[0] = 7.0;
  }
  EXPECT_THROW(DeterministicPolicy::from_tensors(tensors), FormatError);
}

data::OfflineDataset smooth_expert_dataset(std::size_t n, std::uint64_t seed) {
  // Pendulum-shaped records labelled by a smooth deterministic controller.
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(-3.14159, 3.14159), speed(-8.0, 8.0);
  data::OfflineDataset ds("pendulum", data::Regime::kExpert, 3, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double th = angle(rng), dth = speed(rng);
    const std::vector<double> obs = {std::cos(th), std::sin(th), dth};
    const double act = 1.5 * std::tanh(0.8 * obs[1] - 0.1 * obs[2]);
    ds.add({obs, {act}, 0.0, obs, false, i + 1 == n});
  }
  return ds;
}

TEST(BcBaseline, FitsNoiselessExpert) {
  data::OfflineDataset train = smooth_expert_dataset(20'000, 1);
  const data::OfflineDataset held_out = smooth_expert_dataset(2'000, 2);
  BcConfig c;
  c.steps = 6'000;
  const BcRun run = bc_baseline(train, c, 3);
  double mse = 0.0;
  for (std::size_t i = 0; i < held_out.size(); ++i) {
    const double d = run.policy.act_raw(held_out.state(i))[0] - held_out.action(i)[0];
    mse += d * d / held_out.size();
  }
  EXPECT_LT(mse, 1e-3);
}

TEST(BcBaseline, DeterministicUnderSeed) {
  const data::OfflineDataset ds = smooth_expert_dataset(500, 4);
  BcConfig c;
  c.steps = 50;
  c.hidden = 16;
  EXPECT_EQ(bc_baseline(ds, c, 7).policy.net, bc_baseline(ds, c, 7).policy.net);
  EXPECT_NE(bc_baseline(ds, c, 7).policy.net, bc_baseline(ds, c, 8).policy.net);
}

TEST(Profile, EmptySubsampleIsError) {
  const data::OfflineDataset ds = smooth_expert_dataset(50, 5);
  std::mt19937_64 rng(1);
  EXPECT_THROW(profile_rows(ds, 0, rng), ContractError);
  EXPECT_THROW(profile_rows(data::OfflineDataset("pendulum", data::Regime::kExpert, 3, 1),
                            10, rng),
               ContractError);
}

TEST(Profile, SubsampleHasDistinctRowsAndOrderedPercentiles) {
  const data::OfflineDataset ds = smooth_expert_dataset(300, 6);
  std::mt19937_64 rng(2);
  std::vector<std::size_t> rows = profile_rows(ds, 100, rng);
  ASSERT_EQ(rows.size(), 100u);
  std::sort(rows.begin(), rows.end());
  EXPECT_EQ(std::adjacent_find(rows.begin(), rows.end()), rows.end());
  EXPECT_EQ(profile_rows(ds, 1000, rng).size(), 300u);

  const auto density = random_density(3, cvae::bounds_for_env("pendulum"), rng);
  const ProfileSummary p = behavior_profile(*density, ds, {100, 5}, rng);
  EXPECT_EQ(p.values.size(), 100u);
  EXPECT_LE(p.p5, p.p25);
  EXPECT_LE(p.p25, p.p50);
}

data::OfflineDataset tiny_maze_dataset() {
  data::OfflineDataset ds("pointmaze", data::Regime::kStitch, 2, 2);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 3.0), a(-1.0, 1.0);
  for (int i = 0; i < 400; ++i) {
    const std::vector<double> s = {u(rng), u(rng)};
    ds.add({s, {a(rng), a(rng)}, -1.0, {u(rng), u(rng)}, i % 50 == 49, i % 50 == 49});
  }
  return data::normalize_states(ds);
}

SpotConfig tiny_run_config() {
  SpotConfig c = small_config();
  c.steps = 40;
  c.eval_interval = 20;
  c.log_interval = 10;
  c.eval_episodes = 2;
  c.eval_profile_states = 20;
  c.eval_profile_samples = 4;
  return c;
}

TEST(TrainOffline, ZeroStepsLeavesInitialization) {
  const data::OfflineDataset ds = tiny_maze_dataset();
  std::mt19937_64 rng(9);
  const auto density = random_density(2, cvae::bounds_for_env("pointmaze"), rng);
  SpotConfig c = tiny_run_config();
  c.steps = 0;
  const OfflineRun run = train_offline(ds, density, c, 11);
  EXPECT_TRUE(run.agent.same_parameters(make_agent(ds, density, c, 11)));
  EXPECT_TRUE(run.log.records().empty());
  EXPECT_TRUE(run.log.evals().empty());
}

TEST(TrainOffline, SameSeedSameLog) {
  const data::OfflineDataset ds = tiny_maze_dataset();
  std::mt19937_64 rng(10);
  const auto density = random_density(2, cvae::bounds_for_env("pointmaze"), rng);
  const SpotConfig c = tiny_run_config();
  const OfflineRun a = train_offline(ds, density, c, 12);
  const OfflineRun b = train_offline(ds, density, c, 12);
  EXPECT_EQ(a.log, b.log);
  EXPECT_TRUE(a.agent.same_parameters(b.agent));
  ASSERT_EQ(a.log.evals().size(), 2u);
  EXPECT_EQ(a.log.evals()[1].step, 40u);
  EXPECT_EQ(a.log.records().size(), 4u);
  const OfflineRun other = train_offline(ds, density, c, 13);
  EXPECT_FALSE(other.agent.same_parameters(a.agent));
}

}  // namespace
