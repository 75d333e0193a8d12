#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "spot/data/dataset.hpp"
#include "spot/data/generate.hpp"
#include "spot/envs/pointmaze.hpp"
#include "spot/envs/reference.hpp"
#include "spot/envs/rollout.hpp"
#include "spot/errors.hpp"

namespace spot::data {
namespace {

OfflineDataset random_dataset(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  OfflineDataset ds("pendulum", Regime::kMedium, 3, 1);
  for (std::size_t i = 0; i < n; ++i) {
    Transition t;
    t.s = {3.0 + 2.0 * normal(rng), -1.0 + 0.5 * normal(rng), normal(rng)};
    t.a = {normal(rng)};
    t.r = normal(rng);
    t.next_s = {normal(rng), normal(rng), 7.0 * normal(rng)};
    t.done = i % 7 == 0;
    t.episode_end = i % 5 == 0;
    ds.add(t);
  }
  return ds;
}

std::string serialize(const OfflineDataset& ds) {
  std::ostringstream out;
  write_dataset(out, ds);
  return out.str();
}

TEST(Dataset, RoundTripIsLossless) {
  const OfflineDataset ds = normalize_states(random_dataset(300, 1));
  std::istringstream in(serialize(ds));
  const OfflineDataset back = read_dataset(in);
  EXPECT_EQ(back, ds);
  EXPECT_EQ(serialize(back), serialize(ds));
}

TEST(Dataset, CorruptedMagicIsFormatError) {
  std::string bytes = serialize(random_dataset(5, 2));
  bytes[0] = 'X';
  std::istringstream in(bytes);
  EXPECT_THROW(read_dataset(in), FormatError);
}

TEST(Dataset, TruncatedFileIsFormatError) {
  std::string bytes = serialize(random_dataset(5, 2));
  bytes.resize(bytes.size() - 3);
  std::istringstream in(bytes);
  EXPECT_THROW(read_dataset(in), FormatError);
}

TEST(Dataset, VersionMismatchIsFormatError) {
  std::string bytes = serialize(random_dataset(5, 2));
  bytes[8] = 9;
  std::istringstream in(bytes);
  EXPECT_THROW(read_dataset(in), FormatError);
}

TEST(Dataset, RecordDimMismatchIsDimensionError) {
  // Header for a 2-action env, first record carries 3 actions.
  OfflineDataset ds("pointmaze", Regime::kStitch, 2, 2);
  ds.add(Transition{{0.1, 0.2}, {0.5, 0.5}, -1.0, {0.15, 0.25}, false, false});
  std::string bytes = serialize(ds);
  // Locate the action-length field: header, then u32 2 + two state reals.
  const std::string header_end = bytes.substr(0, bytes.size() - (4 + 16 + 4 + 16 + 8 + 4 + 16 + 1));
  std::ostringstream patched;
  patched << header_end;
  const auto put_u32 = [&](std::uint32_t v) { patched.write(reinterpret_cast<const char*>(&v), 4); };
  const auto put_f64 = [&](double v) { patched.write(reinterpret_cast<const char*>(&v), 8); };
  put_u32(2); put_f64(0.1); put_f64(0.2);
  put_u32(3); put_f64(0.5); put_f64(0.5); put_f64(0.5);
  put_f64(-1.0);
  put_u32(2); put_f64(0.15); put_f64(0.25);
  patched.put(0);
  std::istringstream in(patched.str());
  EXPECT_THROW(read_dataset(in), DimensionError);
}

TEST(Dataset, AddRejectsWrongDims) {
  OfflineDataset ds("pointmaze", Regime::kStitch, 2, 2);
  EXPECT_THROW(ds.add(Transition{{0.1}, {0.5, 0.5}, 0.0, {0.1, 0.1}, false, false}),
               DimensionError);
  EXPECT_THROW(ds.add(Transition{{0.1, 0.1}, {0.5, 0.5}, NAN, {0.1, 0.1}, false, false}),
               NumericError);
}

TEST(Normalize, ZeroMeanUnitStd) {
  const OfflineDataset ds = normalize_states(random_dataset(1000, 3));
  for (std::size_t j = 0; j < 3; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) mean += ds.state(i)[j];
    mean /= ds.size();
    double var = 0.0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      var += (ds.state(i)[j] - mean) * (ds.state(i)[j] - mean);
    }
    EXPECT_LT(std::abs(mean), 1e-9);
    EXPECT_NEAR(std::sqrt(var / ds.size()), 1.0, 1e-6);
  }
}

TEST(Normalize, NextStatesUseStateStats) {
  const OfflineDataset raw = random_dataset(50, 4);
  const OfflineDataset ds = normalize_states(raw);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const std::vector<double> expect =
        normalize_observation(ds.stats(), raw.next_state(i));
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(ds.next_state(i)[j], expect[j]);
  }
}

TEST(Normalize, ConstantDimensionMapsToZero) {
  OfflineDataset ds("pointmaze", Regime::kStitch, 2, 2);
  for (int i = 0; i < 10; ++i) {
    ds.add(Transition{{1.5, 0.1 * i}, {0.0, 0.0}, 0.0, {1.5, 0.0}, false, false});
  }
  const OfflineDataset n = normalize_states(ds);
  EXPECT_EQ(n.stats().std[0], kStdFloor);
  for (std::size_t i = 0; i < n.size(); ++i) EXPECT_EQ(n.state(i)[0], 0.0);
}

TEST(Normalize, StandardDataIsNearIdentity) {
  const OfflineDataset once = normalize_states(random_dataset(500, 5));
  OfflineDataset copy(once.env_name(), once.regime(), 3, 1);
  for (std::size_t i = 0; i < once.size(); ++i) {
    Transition t = once.at(i);
    copy.add(t);
  }
  const OfflineDataset twice = normalize_states(copy);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(twice.stats().mean[j], 0.0, 1e-6);
    EXPECT_NEAR(twice.stats().std[j], 1.0, 1e-6);
  }
  for (std::size_t i = 0; i < once.size(); ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(twice.state(i)[j], once.state(i)[j], 1e-6);
    }
  }
}

TEST(Normalize, ErrorsOnEmptyOrRepeated) {
  EXPECT_THROW(normalize_states(OfflineDataset("pendulum", Regime::kMedium, 3, 1)),
               ContractError);
  EXPECT_THROW(normalize_states(normalize_states(random_dataset(10, 1))),
               ContractError);
}

TEST(Minibatch, ReproducibleAndDrawnFromDataset) {
  const OfflineDataset ds = random_dataset(200, 6);
  std::mt19937_64 a(17);
  std::mt19937_64 b(17);
  const Batch x = sample_minibatch(ds, ds.size(), a);
  const Batch y = sample_minibatch(ds, ds.size(), b);
  EXPECT_EQ(x.states, y.states);
  EXPECT_EQ(x.rewards, y.rewards);
  // Every row equals some record exactly.
  for (std::size_t k = 0; k < x.size(); ++k) {
    bool found = false;
    for (std::size_t i = 0; i < ds.size() && !found; ++i) {
      found = ds.reward(i) == x.rewards[k] &&
              std::equal(ds.state(i).begin(), ds.state(i).end(),
                         x.states.row_span(k).begin()) &&
              std::equal(ds.action(i).begin(), ds.action(i).end(),
                         x.actions.row_span(k).begin()) &&
              std::equal(ds.next_state(i).begin(), ds.next_state(i).end(),
                         x.next_states.row_span(k).begin()) &&
              (ds.done(i) ? 1.0 : 0.0) == x.dones[k];
    }
    EXPECT_TRUE(found) << "row " << k;
  }
}

TEST(Minibatch, SizeOneAndErrors) {
  const OfflineDataset ds = random_dataset(20, 7);
  std::mt19937_64 rng(1);
  const Batch one = sample_minibatch(ds, 1, rng);
  EXPECT_EQ(one.size(), 1u);
  EXPECT_EQ(one.states.shape(), (autodiff::Shape{1, 3}));
  EXPECT_THROW(sample_minibatch(ds, 0, rng), ContractError);
  EXPECT_THROW(sample_minibatch(ds, 21, rng), ContractError);
}

TEST(Minibatch, IndicesUniformChiSquare) {
  // Rewards encode the index so draws can be counted.
  OfflineDataset ds("pointmaze", Regime::kStitch, 2, 2);
  for (int i = 0; i < 100; ++i) {
    ds.add(Transition{{0.0, 0.0}, {0.0, 0.0}, static_cast<double>(i), {0.0, 0.0},
                      false, false});
  }
  std::mt19937_64 rng(2024);
  std::vector<double> counts(100, 0.0);
  for (int round = 0; round < 100; ++round) {
    const Batch b = sample_minibatch(ds, 100, rng);
    for (std::size_t k = 0; k < b.size(); ++k) {
      counts[static_cast<std::size_t>(b.rewards[k])] += 1.0;
    }
  }
  // 1e4 draws per batch of 100 rounds is too few; top up to 1e6.
  for (int round = 0; round < 9900; ++round) {
    const Batch b = sample_minibatch(ds, 100, rng);
    for (std::size_t k = 0; k < b.size(); ++k) {
      counts[static_cast<std::size_t>(b.rewards[k])] += 1.0;
    }
  }
  const double expected = 1e6 / 100.0;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // Upper 0.001 quantile of chi-square with 99 degrees of freedom.
  EXPECT_LT(chi2, 148.2304);
}

TEST(Generate, RegimeNamesRoundTrip) {
  for (const char* name :
       {"expert", "medium", "medium_replay", "medium_expert", "stitch"}) {
    EXPECT_EQ(to_string(parse_regime(name)), name);
  }
  EXPECT_THROW(parse_regime("random"), ConfigError);
}

TEST(Generate, Errors) {
  EXPECT_THROW(generate("pendulum", Regime::kStitch, 100, 0), ConfigError);
  EXPECT_THROW(generate("walker", Regime::kExpert, 100, 0), ConfigError);
}

TEST(Generate, SameSeedSameBytes) {
  for (Regime r : {Regime::kMedium, Regime::kStitch}) {
    const OfflineDataset a = generate("pointmaze", r, 3000, 9);
    const OfflineDataset b = generate("pointmaze", r, 3000, 9);
    EXPECT_EQ(serialize(a), serialize(b));
    EXPECT_EQ(a.size(), 3000u);
  }
}

TEST(Generate, NoiselessExpertMatchesController) {
  GenerateOptions opts;
  opts.expert_noise = 0.0;
  for (const char* env : {"pendulum", "pointmaze"}) {
    const OfflineDataset ds = generate(env, Regime::kExpert, 4000, 5, opts);
    // Replay each episode's start through the controller directly.
    const auto ctrl = envs::make_expert_controller(env);
    for (const auto& [begin, end] : ds.episodes()) {
      if (!ds.done(end - 1) &&
          end - begin != static_cast<std::size_t>(
                             envs::make_env(env)->spec().max_episode_steps)) {
        continue;
      }
      auto e = envs::make_env(env);
      const auto s0 = ds.state(begin);
      std::vector<double> obs = e->reset_to({s0.begin(), s0.end()});
      double ret = 0.0;
      while (true) {
        const envs::StepResult st = e->step(ctrl->act(obs));
        ret += st.reward;
        if (st.done()) break;
        obs = st.next_state;
      }
      double stored = 0.0;
      for (std::size_t i = begin; i < end; ++i) stored += ds.reward(i) - ds.reward_shift();
      EXPECT_EQ(stored, ret) << env;
    }
  }
}

TEST(Generate, SparseRewardShiftRecorded) {
  const OfflineDataset ds = generate("pointmaze", Regime::kExpert, 2000, 1);
  EXPECT_EQ(ds.reward_shift(), -1.0);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(ds.reward(i), ds.done(i) ? 0.0 : -1.0);
  }
  EXPECT_EQ(generate("pendulum", Regime::kExpert, 500, 1).reward_shift(), 0.0);
}

TEST(Generate, StitchNeverSpansStartToGoal) {
  const OfflineDataset ds = generate("pointmaze", Regime::kStitch, 20000, 3);
  std::size_t reaching_goal = 0;
  for (const auto& [begin, end] : ds.episodes()) {
    bool start = false;
    bool goal = false;
    for (std::size_t i = begin; i < end; ++i) {
      for (auto p : {ds.state(i), ds.next_state(i)}) {
        const envs::Point pt{p[0], p[1]};
        start = start || envs::maze::in_start_region(pt);
        goal = goal || envs::maze::in_goal(pt);
      }
    }
    EXPECT_FALSE(start && goal);
    if (goal) ++reaching_goal;
  }
  // Segments do cover both ends of the maze.
  EXPECT_GT(reaching_goal, 0u);
}

TEST(Generate, MediumBetweenRandomAndExpert) {
  const OfflineDataset ds = generate("pendulum", Regime::kMedium, 20000, 4);
  const double score = envs::normalized_score(mean_episode_return(ds), "pendulum");
  EXPECT_GT(score, 5.0);
  EXPECT_LT(score, 95.0);
}

}  // namespace
}  // namespace spot::data
