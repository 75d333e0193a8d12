#include "spot/cvae/gaussian.hpp"

#include <algorithm>
#include <cmath>

#include "spot/autodiff/adam.hpp"
#include "spot/autodiff/ops.hpp"
#include "spot/errors.hpp"

namespace spot::cvae {

using autodiff::Graph;
using autodiff::Mlp;
using autodiff::NamedTensor;
using autodiff::Tensor;
using autodiff::Var;

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

double sum_log_half_range(const ActionBounds& bounds) {
  double total = 0.0;
  for (std::size_t i = 0; i < bounds.dim(); ++i) {
    total += std::log(0.5 * (bounds.high[i] - bounds.low[i]));
  }
  return total;
}

}  // namespace

GaussianDensityModel::GaussianDensityModel(std::size_t state_dim,
                                           ActionBounds bounds,
                                           std::size_t hidden,
                                           std::size_t layers,
                                           std::mt19937_64& rng)
    : state_dim_(state_dim), bounds_(std::move(bounds)) {
  bounds_.validate();
  net_ = Mlp(autodiff::make_mlp_spec(state_dim_, hidden, layers, 2 * bounds_.dim()),
             rng);
}

GaussianDensityModel::GaussianDensityModel(std::size_t state_dim,
                                           ActionBounds bounds, Mlp net)
    : state_dim_(state_dim), bounds_(std::move(bounds)), net_(std::move(net)) {
  bounds_.validate();
  if (net_.spec().input_width() != state_dim_ ||
      net_.spec().output_width() != 2 * bounds_.dim()) {
    throw ShapeError("gaussian density network widths do not fit");
  }
}

Var GaussianDensityModel::log_density_with(const autodiff::BoundMlp& net, Var s,
                                           Var a) const {
  using namespace autodiff;
  Graph& g = s.graph();
  const std::size_t ad = bounds_.dim();
  const Var out = net.forward(s);
  const Var mu = slice_cols(out, 0, ad);
  const Var log_var = clip(slice_cols(out, ad, 2 * ad), kLogVarMin, kLogVarMax);
  Tensor inv_half = bounds_.half_range_row();
  for (double& v : inv_half.storage()) v = 1.0 / v;
  const Var y = clip((a - g.constant(bounds_.center_row())) * g.constant(inv_half),
                     -1.0 + kEdge, 1.0 - kEdge);
  const Var u = atanh(y);
  const Var log_jacobian = row_sum(log(add_scalar(neg(square(y)), 1.0)));
  return add_scalar(row_sum(gaussian_log_density(u, mu, log_var)) - log_jacobian,
                    -sum_log_half_range(bounds_));
}

Var GaussianDensityModel::log_density(Graph& g, Var s, Var a,
                                      const Tensor&) const {
  return log_density_with(net_.bind(g, false), s, a);
}

std::vector<double> GaussianDensityModel::estimate_log_density(
    const Tensor& s, const Tensor& a, std::size_t, std::mt19937_64&) const {
  const std::size_t ad = bounds_.dim();
  if (a.rows() != s.rows() || a.cols() != ad) {
    throw ShapeError("gaussian density: action shape " +
                               autodiff::to_string(a.shape()) + " does not fit");
  }
  const Tensor out = net_.predict(s);
  const double log_half = sum_log_half_range(bounds_);
  std::vector<double> result(s.rows());
  for (std::size_t r = 0; r < s.rows(); ++r) {
    double total = -log_half;
    for (std::size_t j = 0; j < ad; ++j) {
      const double half = 0.5 * (bounds_.high[j] - bounds_.low[j]);
      const double center = 0.5 * (bounds_.high[j] + bounds_.low[j]);
      const double y =
          std::clamp((a(r, j) - center) / half, -1.0 + kEdge, 1.0 - kEdge);
      const double u = std::atanh(y);
      const double mu = out(r, j);
      const double lv = std::clamp(out(r, ad + j), kLogVarMin, kLogVarMax);
      const double d = u - mu;
      total += -0.5 * (kLog2Pi + lv + d * d * std::exp(-lv)) -
               std::log(1.0 - y * y);
    }
    result[r] = total;
  }
  return result;
}

std::vector<NamedTensor> GaussianDensityModel::to_tensors(
    const std::string& prefix) const {
  std::vector<NamedTensor> out;
  out.push_back({prefix + "kind.gaussian", Tensor::row({1.0})});
  out.push_back({prefix + "dims",
                 Tensor::row({static_cast<double>(state_dim_),
                              static_cast<double>(bounds_.dim()),
                              static_cast<double>(net_.spec().widths[1]),
                              static_cast<double>(net_.spec().num_layers())})});
  out.push_back({prefix + "action_low", Tensor::row(bounds_.low)});
  out.push_back({prefix + "action_high", Tensor::row(bounds_.high)});
  const auto names = net_.param_names(prefix + "net");
  for (std::size_t i = 0; i < names.size(); ++i) {
    out.push_back({names[i], net_.params()[i]});
  }
  return out;
}

GaussianDensityModel GaussianDensityModel::from_tensors(
    const std::vector<NamedTensor>& ts, const std::string& prefix) {
  using autodiff::find_tensor;
  const Tensor& dims = find_tensor(ts, prefix + "dims");
  if (dims.size() != 4) throw FormatError("malformed gaussian density metadata");
  const auto sd = static_cast<std::size_t>(dims[0]);
  const auto ad = static_cast<std::size_t>(dims[1]);
  const auto hidden = static_cast<std::size_t>(dims[2]);
  const auto layers = static_cast<std::size_t>(dims[3]);
  ActionBounds bounds{find_tensor(ts, prefix + "action_low").storage(),
                      find_tensor(ts, prefix + "action_high").storage()};
  autodiff::MlpSpec spec = autodiff::make_mlp_spec(sd, hidden, layers, 2 * ad);
  std::vector<Tensor> params;
  for (std::size_t i = 0; i < layers; ++i) {
    params.push_back(find_tensor(ts, prefix + "net.w" + std::to_string(i)));
    params.push_back(find_tensor(ts, prefix + "net.b" + std::to_string(i)));
  }
  return GaussianDensityModel(sd, std::move(bounds),
                              Mlp(std::move(spec), std::move(params)));
}

std::unique_ptr<BehaviorDensity> GaussianDensityModel::clone() const {
  return std::make_unique<GaussianDensityModel>(*this);
}

GaussianTrainResult train_gaussian_density(const Tensor& states,
                                           const Tensor& actions,
                                           const ActionBounds& bounds,
                                           const CvaeConfig& config,
                                           std::uint64_t seed) {
  if (states.rows() == 0) throw ContractError("gaussian baseline: empty dataset");
  if (config.batch_size == 0) throw ConfigError("batch_size must be positive");
  std::mt19937_64 rng(seed);
  GaussianTrainResult result{
      GaussianDensityModel(states.cols(), bounds, config.hidden, config.layers, rng),
      {}};
  GaussianDensityModel& model = result.model;
  autodiff::AdamState state = autodiff::AdamState::zeros_like(model.net().params());
  const autodiff::AdamConfig adam{config.learning_rate};
  std::uniform_int_distribution<std::size_t> pick(0, states.rows() - 1);
  Tensor s(config.batch_size, states.cols());
  Tensor a(config.batch_size, actions.cols());
  for (std::size_t it = 0; it < config.iterations; ++it) {
    try {
      for (std::size_t k = 0; k < config.batch_size; ++k) {
        const std::size_t i = pick(rng);
        std::ranges::copy(states.row_span(i), s.row_span(k).begin());
        std::ranges::copy(actions.row_span(i), a.row_span(k).begin());
      }
      Graph g;
      const autodiff::BoundMlp net = model.net().bind(g, true);
      const Var loss = autodiff::neg(autodiff::mean(
          model.log_density_with(net, g.constant(s), g.constant(a))));
      g.backward(loss);
      autodiff::adam_step(model.net().params(), g.grads(net.params), state, adam);
      result.loss_trace.push_back(loss.value().item());
    } catch (const NumericError& e) {
      throw NumericError("gaussian baseline iteration " + std::to_string(it) +
                         ": " + e.what());
    }
  }
  return result;
}

GaussianTrainResult gaussian_density_baseline(const data::OfflineDataset& dataset,
                                              const CvaeConfig& config,
                                              std::uint64_t seed) {
  if (dataset.empty()) throw ContractError("gaussian baseline: empty dataset");
  const auto [s, a] = state_action_tensors(dataset);
  return train_gaussian_density(s, a, bounds_for_env(dataset.env_name()), config,
                                seed);
}

}  // namespace spot::cvae
