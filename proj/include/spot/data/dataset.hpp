#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spot/autodiff/tensor.hpp"

namespace spot::data {

enum class Regime { kExpert, kMedium, kMediumReplay, kMediumExpert, kStitch };

std::string to_string(Regime regime);
// Accepts "expert", "medium", "medium_replay", "medium_expert", "stitch".
Regime parse_regime(const std::string& name);

struct Transition {
  std::vector<double> s;
  std::vector<double> a;
  double r = 0.0;
  std::vector<double> next_s;
  // True environment termination (goal reached); time limits are not done.
  bool done = false;
  // Last stored transition of a trajectory (goal, time limit, segment end,
  // or the dataset size cut).
  bool episode_end = false;

  bool operator==(const Transition&) const = default;
};

struct NormalizationStats {
  std::vector<double> mean;
  std::vector<double> std;

  bool operator==(const NormalizationStats&) const = default;
};

inline constexpr double kStdFloor = 1e-3;

std::vector<double> normalize_observation(const NormalizationStats& stats,
                                          std::span<const double> obs);

// Column-oriented store of transitions for one environment.
class OfflineDataset {
 public:
  OfflineDataset() = default;
  OfflineDataset(std::string env_name, Regime regime, std::size_t state_dim,
                 std::size_t action_dim);

  const std::string& env_name() const { return env_name_; }
  Regime regime() const { return regime_; }
  std::size_t state_dim() const { return state_dim_; }
  std::size_t action_dim() const { return action_dim_; }
  std::size_t size() const { return rewards_.size(); }
  bool empty() const { return rewards_.empty(); }

  // Throws DimensionError on mismatched vectors, NumericError on non-finite.
  void add(const Transition& t);
  Transition at(std::size_t i) const;
  void reserve(std::size_t n);

  std::span<const double> state(std::size_t i) const;
  std::span<const double> action(std::size_t i) const;
  std::span<const double> next_state(std::size_t i) const;
  double reward(std::size_t i) const { return rewards_[i]; }
  bool done(std::size_t i) const { return dones_[i] != 0; }
  bool episode_end(std::size_t i) const { return episode_ends_[i] != 0; }

  // Present when states were normalized; live observations must then go
  // through normalize_observation with these stats.
  bool normalized() const { return normalized_; }
  const NormalizationStats& stats() const { return stats_; }
  // Constant added to every stored reward at generation time.
  double reward_shift() const { return reward_shift_; }
  void set_reward_shift(double shift) { reward_shift_ = shift; }

  // Index ranges [begin, end) of the stored trajectories.
  std::vector<std::pair<std::size_t, std::size_t>> episodes() const;

  bool operator==(const OfflineDataset&) const = default;

 private:
  friend OfflineDataset normalize_states(const OfflineDataset& dataset);
  friend OfflineDataset read_dataset(std::istream& in);

  std::string env_name_;
  Regime regime_ = Regime::kExpert;
  std::size_t state_dim_ = 0;
  std::size_t action_dim_ = 0;
  std::vector<double> states_;
  std::vector<double> actions_;
  std::vector<double> rewards_;
  std::vector<double> next_states_;
  std::vector<std::uint8_t> dones_;
  std::vector<std::uint8_t> episode_ends_;
  bool normalized_ = false;
  NormalizationStats stats_;
  double reward_shift_ = 0.0;
};

// Stats from s only (population std floored at kStdFloor); s and s' are both
// transformed. Throws ContractError on empty or already normalized data.
[[nodiscard]] OfflineDataset normalize_states(const OfflineDataset& dataset);

// Columns of one minibatch; rewards and dones are [n, 1].
struct Batch {
  autodiff::Tensor states;
  autodiff::Tensor actions;
  autodiff::Tensor rewards;
  autodiff::Tensor next_states;
  autodiff::Tensor dones;

  std::size_t size() const { return rewards.rows(); }
};

// Uniform with replacement. Throws ContractError for n == 0 or n > size.
Batch sample_minibatch(const OfflineDataset& dataset, std::size_t n,
                       std::mt19937_64& rng);
// The rows at the given indices, in order.
Batch gather(const OfflineDataset& dataset, std::span<const std::size_t> rows);

// Binary file:
//   "SPOTDATA" | u8 version | env | regime | u32 state_dim | u32 action_dim |
//   u64 count | u8 normalized | f64 reward_shift | f64 mean[state_dim] |
//   f64 std[state_dim] | count x record
// record: u32 n | f64 s[n] | u32 m | f64 a[m] | f64 r | u32 n | f64 s'[n] |
//   u8 flags (bit 0 done, bit 1 episode end)
// Strings are u32 length + bytes; everything little-endian.
inline constexpr char kDatasetMagic[9] = "SPOTDATA";
inline constexpr std::uint8_t kDatasetVersion = 1;

void write_dataset(std::ostream& out, const OfflineDataset& dataset);
OfflineDataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const OfflineDataset& dataset);
OfflineDataset load_dataset(const std::filesystem::path& path);

}  // namespace spot::data
