#include "spot/agent/policy.hpp"

#include <cmath>

#include "spot/errors.hpp"

namespace spot::agent {

using autodiff::Tensor;

autodiff::MlpSpec actor_spec(std::size_t state_dim, std::size_t action_dim,
                             std::size_t hidden, std::size_t layers) {
  return autodiff::make_mlp_spec(state_dim, hidden, layers, action_dim,
                                 autodiff::Activation::kRelu,
                                 autodiff::Activation::kIdentity);
}

Tensor DeterministicPolicy::act(const Tensor& states) const {
  return squash_to_bounds(net.predict(states), bounds);
}

std::vector<double> DeterministicPolicy::act_raw(
    std::span<const double> observation) const {
  const Tensor row = stats ? Tensor::row(data::normalize_observation(*stats, observation))
                           : Tensor::row(observation);
  return act(row).storage();
}

envs::PolicyFn DeterministicPolicy::as_policy_fn() const {
  return [policy = *this](std::span<const double> obs) {
    return policy.act_raw(obs);
  };
}

std::vector<autodiff::NamedTensor> DeterministicPolicy::to_tensors() const {
  const autodiff::MlpSpec& spec = net.spec();
  std::vector<autodiff::NamedTensor> out;
  // state_dim, action_dim, hidden width, linear layers.
  out.push_back({"policy.shape",
                 Tensor::row(std::vector<double>{
                     static_cast<double>(spec.input_width()),
                     static_cast<double>(spec.output_width()),
                     static_cast<double>(spec.num_layers() > 1 ? spec.widths[1] : 0),
                     static_cast<double>(spec.num_layers())})});
  out.push_back({"policy.action_low", Tensor::row(bounds.low)});
  out.push_back({"policy.action_high", Tensor::row(bounds.high)});
  if (stats) {
    out.push_back({"policy.stats_mean", Tensor::row(stats->mean)});
    out.push_back({"policy.stats_std", Tensor::row(stats->std)});
  }
  const auto names = net.param_names("policy.net");
  for (std::size_t i = 0; i < names.size(); ++i) out.push_back({names[i], net.params()[i]});
  return out;
}

DeterministicPolicy DeterministicPolicy::from_tensors(
    const std::vector<autodiff::NamedTensor>& ts) {
  using autodiff::find_tensor;
  const Tensor& shape = find_tensor(ts, "policy.shape");
  if (shape.size() != 4) throw FormatError("malformed policy shape tensor");
  const auto u = [&](std::size_t i) { return static_cast<std::size_t>(std::llround(shape[i])); };
  DeterministicPolicy p;
  p.bounds = ActionBounds{find_tensor(ts, "policy.action_low").storage(),
                          find_tensor(ts, "policy.action_high").storage()};
  p.bounds.validate();
  if (p.bounds.dim() != u(1)) throw FormatError("policy bounds do not match its output width");
  for (const autodiff::NamedTensor& t : ts) {
    if (t.name == "policy.stats_mean") {
      p.stats = data::NormalizationStats{t.value.storage(),
                                         find_tensor(ts, "policy.stats_std").storage()};
    }
  }
  const autodiff::MlpSpec spec = actor_spec(u(0), u(1), u(2), u(3));
  std::vector<Tensor> params;
  for (std::size_t i = 0; i < spec.num_layers(); ++i) {
    params.push_back(find_tensor(ts, "policy.net.w" + std::to_string(i)));
    params.push_back(find_tensor(ts, "policy.net.b" + std::to_string(i)));
  }
  try {
    p.net = autodiff::Mlp(spec, std::move(params));
  } catch (const ShapeError& e) {
    throw FormatError(std::string("policy weights do not match its shape: ") + e.what());
  }
  if (p.stats && (p.stats->mean.size() != u(0) || p.stats->std.size() != u(0))) {
    throw FormatError("policy normalization stats do not match its input width");
  }
  return p;
}

void save_policy(const std::filesystem::path& path, const DeterministicPolicy& policy) {
  autodiff::save_checkpoint(path, policy.to_tensors());
}

DeterministicPolicy load_policy(const std::filesystem::path& path) {
  return DeterministicPolicy::from_tensors(autodiff::load_checkpoint(path));
}

std::optional<data::NormalizationStats> stats_of(const data::OfflineDataset& ds) {
  if (!ds.normalized()) return std::nullopt;
  return ds.stats();
}

}  // namespace spot::agent
