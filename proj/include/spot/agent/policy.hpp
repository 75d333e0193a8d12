#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "spot/action_bounds.hpp"
#include "spot/autodiff/checkpoint.hpp"
#include "spot/autodiff/mlp.hpp"
#include "spot/data/dataset.hpp"
#include "spot/envs/rollout.hpp"

namespace spot::agent {

// Deterministic tanh-squashed policy network plus the observation
// normalization it was trained under.
struct DeterministicPolicy {
  autodiff::Mlp net;
  ActionBounds bounds;
  std::optional<data::NormalizationStats> stats;

  // Actions for already-normalized states, one row per state.
  autodiff::Tensor act(const autodiff::Tensor& states) const;
  // Action for one raw environment observation.
  std::vector<double> act_raw(std::span<const double> observation) const;
  envs::PolicyFn as_policy_fn() const;

  // Network under "policy.net", bounds, stats and the actor shape.
  std::vector<autodiff::NamedTensor> to_tensors() const;
  static DeterministicPolicy from_tensors(const std::vector<autodiff::NamedTensor>& ts);

  bool operator==(const DeterministicPolicy&) const = default;
};

void save_policy(const std::filesystem::path& path, const DeterministicPolicy& policy);
DeterministicPolicy load_policy(const std::filesystem::path& path);

// The actor network shape shared by SPOT and BC. The linear output is
// squashed into the action bounds outside the network.
autodiff::MlpSpec actor_spec(std::size_t state_dim, std::size_t action_dim,
                             std::size_t hidden, std::size_t layers);

std::optional<data::NormalizationStats> stats_of(const data::OfflineDataset& ds);

}  // namespace spot::agent
