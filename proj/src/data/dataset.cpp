#include "spot/data/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "spot/errors.hpp"
#include "spot/io/binary.hpp"

namespace spot::data {

namespace {

void check_len(std::size_t got, std::size_t want, const char* what) {
  if (got != want) {
    throw DimensionError(std::string(what) + " has " + std::to_string(got) +
                         " entries, dataset expects " + std::to_string(want));
  }
}

void append(std::vector<double>& dst, std::span<const double> src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

void check_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError(std::string("non-finite ") + what);
  }
}

}  // namespace

std::string to_string(Regime regime) {
  switch (regime) {
    case Regime::kExpert:
      return "expert";
    case Regime::kMedium:
      return "medium";
    case Regime::kMediumReplay:
      return "medium_replay";
    case Regime::kMediumExpert:
      return "medium_expert";
    case Regime::kStitch:
      return "stitch";
  }
  return "unknown";
}

Regime parse_regime(const std::string& name) {
  for (Regime r : {Regime::kExpert, Regime::kMedium, Regime::kMediumReplay,
                   Regime::kMediumExpert, Regime::kStitch}) {
    if (to_string(r) == name) return r;
  }
  throw ConfigError("unknown regime '" + name + "'");
}

std::vector<double> normalize_observation(const NormalizationStats& stats,
                                          std::span<const double> obs) {
  check_len(obs.size(), stats.mean.size(), "observation");
  std::vector<double> out(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    out[i] = (obs[i] - stats.mean[i]) / stats.std[i];
  }
  return out;
}

OfflineDataset::OfflineDataset(std::string env_name, Regime regime,
                               std::size_t state_dim, std::size_t action_dim)
    : env_name_(std::move(env_name)), regime_(regime), state_dim_(state_dim),
      action_dim_(action_dim) {}

void OfflineDataset::reserve(std::size_t n) {
  states_.reserve(n * state_dim_);
  actions_.reserve(n * action_dim_);
  rewards_.reserve(n);
  next_states_.reserve(n * state_dim_);
  dones_.reserve(n);
  episode_ends_.reserve(n);
}

void OfflineDataset::add(const Transition& t) {
  check_len(t.s.size(), state_dim_, "state");
  check_len(t.a.size(), action_dim_, "action");
  check_len(t.next_s.size(), state_dim_, "next state");
  check_finite(t.s, "state");
  check_finite(t.a, "action");
  check_finite(t.next_s, "next state");
  check_finite(std::span<const double>(&t.r, 1), "reward");
  append(states_, t.s);
  append(actions_, t.a);
  rewards_.push_back(t.r);
  append(next_states_, t.next_s);
  dones_.push_back(t.done ? 1 : 0);
  episode_ends_.push_back(t.episode_end ? 1 : 0);
}

std::span<const double> OfflineDataset::state(std::size_t i) const {
  return std::span<const double>(states_).subspan(i * state_dim_, state_dim_);
}

std::span<const double> OfflineDataset::action(std::size_t i) const {
  return std::span<const double>(actions_).subspan(i * action_dim_, action_dim_);
}

std::span<const double> OfflineDataset::next_state(std::size_t i) const {
  return std::span<const double>(next_states_)
      .subspan(i * state_dim_, state_dim_);
}

Transition OfflineDataset::at(std::size_t i) const {
  if (i >= size()) throw ContractError("transition index out of range");
  Transition t;
  const auto s = state(i);
  const auto a = action(i);
  const auto n = next_state(i);
  t.s.assign(s.begin(), s.end());
  t.a.assign(a.begin(), a.end());
  t.r = rewards_[i];
  t.next_s.assign(n.begin(), n.end());
  t.done = done(i);
  t.episode_end = episode_end(i);
  return t;
}

std::vector<std::pair<std::size_t, std::size_t>> OfflineDataset::episodes()
    const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  std::size_t begin = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (episode_end(i)) {
      out.emplace_back(begin, i + 1);
      begin = i + 1;
    }
  }
  if (begin < size()) out.emplace_back(begin, size());
  return out;
}

OfflineDataset normalize_states(const OfflineDataset& dataset) {
  if (dataset.empty()) throw ContractError("cannot normalize an empty dataset");
  if (dataset.normalized()) throw ContractError("dataset is already normalized");
  const std::size_t d = dataset.state_dim();
  const std::size_t n = dataset.size();
  NormalizationStats stats{std::vector<double>(d, 0.0),
                           std::vector<double>(d, 0.0)};
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = dataset.state(i);
    for (std::size_t j = 0; j < d; ++j) stats.mean[j] += s[j];
  }
  for (double& m : stats.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto s = dataset.state(i);
    for (std::size_t j = 0; j < d; ++j) {
      const double c = s[j] - stats.mean[j];
      stats.std[j] += c * c;
    }
  }
  for (double& v : stats.std) {
    v = std::max(std::sqrt(v / static_cast<double>(n)), kStdFloor);
  }
  OfflineDataset out = dataset;
  for (std::size_t i = 0; i < n * d; ++i) {
    const std::size_t j = i % d;
    out.states_[i] = (out.states_[i] - stats.mean[j]) / stats.std[j];
    out.next_states_[i] = (out.next_states_[i] - stats.mean[j]) / stats.std[j];
  }
  out.normalized_ = true;
  out.stats_ = std::move(stats);
  return out;
}

Batch gather(const OfflineDataset& dataset, std::span<const std::size_t> rows) {
  const std::size_t n = rows.size();
  const std::size_t sd = dataset.state_dim();
  const std::size_t ad = dataset.action_dim();
  Batch b{autodiff::Tensor(n, sd), autodiff::Tensor(n, ad),
          autodiff::Tensor(n, 1), autodiff::Tensor(n, sd),
          autodiff::Tensor(n, 1)};
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = rows[k];
    if (i >= dataset.size()) throw ContractError("row index out of range");
    std::ranges::copy(dataset.state(i), b.states.row_span(k).begin());
    std::ranges::copy(dataset.action(i), b.actions.row_span(k).begin());
    std::ranges::copy(dataset.next_state(i), b.next_states.row_span(k).begin());
    b.rewards[k] = dataset.reward(i);
    b.dones[k] = dataset.done(i) ? 1.0 : 0.0;
  }
  return b;
}

Batch sample_minibatch(const OfflineDataset& dataset, std::size_t n,
                       std::mt19937_64& rng) {
  if (n == 0) throw ContractError("minibatch size must be positive");
  if (n > dataset.size()) {
    throw ContractError("minibatch size " + std::to_string(n) +
                        " exceeds dataset size " +
                        std::to_string(dataset.size()));
  }
  std::uniform_int_distribution<std::size_t> pick(0, dataset.size() - 1);
  std::vector<std::size_t> rows(n);
  for (std::size_t& r : rows) r = pick(rng);
  return gather(dataset, rows);
}

void write_dataset(std::ostream& out, const OfflineDataset& ds) {
  using namespace io;
  write_magic(out, kDatasetMagic);
  write_pod<std::uint8_t>(out, kDatasetVersion);
  write_string(out, ds.env_name());
  write_string(out, to_string(ds.regime()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ds.state_dim()));
  write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(ds.action_dim()));
  write_pod<std::uint64_t>(out, ds.size());
  write_pod<std::uint8_t>(out, ds.normalized() ? 1 : 0);
  write_pod<double>(out, ds.reward_shift());
  for (std::size_t j = 0; j < ds.state_dim(); ++j) {
    write_pod<double>(out, ds.normalized() ? ds.stats().mean[j] : 0.0);
  }
  for (std::size_t j = 0; j < ds.state_dim(); ++j) {
    write_pod<double>(out, ds.normalized() ? ds.stats().std[j] : 1.0);
  }
  const auto write_vec = [&](std::span<const double> v) {
    write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
    for (double x : v) write_pod<double>(out, x);
  };
  for (std::size_t i = 0; i < ds.size(); ++i) {
    write_vec(ds.state(i));
    write_vec(ds.action(i));
    write_pod<double>(out, ds.reward(i));
    write_vec(ds.next_state(i));
    const std::uint8_t flags =
        (ds.done(i) ? 1 : 0) | (ds.episode_end(i) ? 2 : 0);
    write_pod<std::uint8_t>(out, flags);
  }
  if (!out) throw IoError("failed writing dataset");
}

OfflineDataset read_dataset(std::istream& in) {
  using namespace io;
  expect_magic(in, kDatasetMagic, "dataset");
  const auto version = read_pod<std::uint8_t>(in, "version");
  if (version != kDatasetVersion) {
    throw FormatError("unsupported dataset version " + std::to_string(version));
  }
  const std::string env = read_string(in, "env name");
  const Regime regime = [&] {
    const std::string name = read_string(in, "regime");
    try {
      return parse_regime(name);
    } catch (const ConfigError&) {
      throw FormatError("unknown regime '" + name + "' in dataset header");
    }
  }();
  const std::size_t sd = read_pod<std::uint32_t>(in, "state_dim");
  const std::size_t ad = read_pod<std::uint32_t>(in, "action_dim");
  const std::uint64_t count = read_pod<std::uint64_t>(in, "count");
  OfflineDataset ds(env, regime, sd, ad);
  ds.normalized_ = read_pod<std::uint8_t>(in, "normalized flag") != 0;
  ds.reward_shift_ = read_pod<double>(in, "reward shift");
  NormalizationStats stats{std::vector<double>(sd), std::vector<double>(sd)};
  for (double& m : stats.mean) m = read_pod<double>(in, "state mean");
  for (double& s : stats.std) s = read_pod<double>(in, "state std");
  if (ds.normalized_) ds.stats_ = std::move(stats);

  const auto read_vec = [&](std::size_t want, const char* what,
                            std::vector<double>& dst) {
    const std::size_t n = read_pod<std::uint32_t>(in, what);
    if (n != want) {
      throw DimensionError(std::string("record ") + what + " has " +
                           std::to_string(n) + " entries, header says " +
                           std::to_string(want));
    }
    dst.resize(n);
    for (double& x : dst) x = read_pod<double>(in, what);
  };
  if (count < (1u << 28)) ds.reserve(count);
  Transition t;
  for (std::uint64_t i = 0; i < count; ++i) {
    read_vec(sd, "state", t.s);
    read_vec(ad, "action", t.a);
    t.r = read_pod<double>(in, "reward");
    read_vec(sd, "next state", t.next_s);
    const auto flags = read_pod<std::uint8_t>(in, "flags");
    t.done = (flags & 1) != 0;
    t.episode_end = (flags & 2) != 0;
    ds.add(t);
  }
  return ds;
}

void save_dataset(const std::filesystem::path& path, const OfflineDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_dataset(out, ds);
}

OfflineDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path.string());
  return read_dataset(in);
}

}  // namespace spot::data
