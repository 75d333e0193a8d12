#include "spot/autodiff/mlp.hpp"

#include <Eigen/Core>
#include <cmath>

#include "spot/autodiff/ops.hpp"
#include "spot/errors.hpp"

namespace spot::autodiff {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Var activate(Var x, Activation act) {
  switch (act) {
    case Activation::kIdentity: return x;
    case Activation::kRelu: return relu(x);
    case Activation::kTanh: return tanh(x);
  }
  return x;
}

void check_spec(const MlpSpec& spec) {
  if (spec.widths.size() < 2) {
    throw ShapeError("mlp needs at least an input and an output width");
  }
  for (std::size_t w : spec.widths) {
    if (w == 0) throw ShapeError("mlp layer widths must be positive");
  }
}

}  // namespace

MlpSpec make_mlp_spec(std::size_t input, std::size_t hidden,
                      std::size_t num_layers, std::size_t output,
                      Activation hidden_act, Activation output_act) {
  if (num_layers == 0) throw ConfigError("mlp needs at least one layer");
  MlpSpec spec;
  spec.widths.push_back(input);
  for (std::size_t i = 0; i + 1 < num_layers; ++i) spec.widths.push_back(hidden);
  spec.widths.push_back(output);
  spec.hidden = hidden_act;
  spec.output = output_act;
  return spec;
}

Mlp::Mlp(MlpSpec spec, std::mt19937_64& rng) : spec_(std::move(spec)) {
  check_spec(spec_);
  for (std::size_t i = 0; i < spec_.num_layers(); ++i) {
    const std::size_t fan_in = spec_.widths[i];
    const std::size_t fan_out = spec_.widths[i + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Tensor w(Shape{fan_in, fan_out});
    for (double& x : w.data()) x = dist(rng);
    Tensor b(Shape{1, fan_out});
    for (double& x : b.data()) x = dist(rng);
    params_.push_back(std::move(w));
    params_.push_back(std::move(b));
  }
}

Mlp::Mlp(MlpSpec spec, std::vector<Tensor> params)
    : spec_(std::move(spec)), params_(std::move(params)) {
  check_spec(spec_);
  if (params_.size() != 2 * spec_.num_layers()) {
    throw ShapeError("mlp expects " + std::to_string(2 * spec_.num_layers()) +
                     " parameter tensors, got " +
                     std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < spec_.num_layers(); ++i) {
    const Shape ws{spec_.widths[i], spec_.widths[i + 1]};
    const Shape bs{1, spec_.widths[i + 1]};
    if (params_[2 * i].shape() != ws || params_[2 * i + 1].shape() != bs) {
      throw ShapeError("mlp layer " + std::to_string(i) + " expects " +
                       to_string(ws) + " / " + to_string(bs) + ", got " +
                       to_string(params_[2 * i].shape()) + " / " +
                       to_string(params_[2 * i + 1].shape()));
    }
  }
}

std::size_t Mlp::num_scalars() const {
  std::size_t n = 0;
  for (const Tensor& t : params_) n += t.size();
  return n;
}

std::vector<std::string> Mlp::param_names(const std::string& prefix) const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < spec_.num_layers(); ++i) {
    names.push_back(prefix + ".w" + std::to_string(i));
    names.push_back(prefix + ".b" + std::to_string(i));
  }
  return names;
}

BoundMlp Mlp::bind(Graph& graph, bool trainable) const {
  BoundMlp bound;
  bound.spec = &spec_;
  bound.params.reserve(params_.size());
  for (const Tensor& t : params_) bound.params.push_back(graph.leaf(t, trainable));
  return bound;
}

Var BoundMlp::forward(Var input, std::span<const Tensor> dropout_masks) const {
  const std::size_t layers = spec->num_layers();
  if (!dropout_masks.empty() && dropout_masks.size() != layers - 1) {
    throw ShapeError("mlp dropout expects one mask per hidden layer");
  }
  if (input.shape().cols != spec->input_width()) {
    throw ShapeError("mlp input width " + std::to_string(input.shape().cols) +
                     " does not match expected " +
                     std::to_string(spec->input_width()));
  }
  Var h = input;
  for (std::size_t i = 0; i < layers; ++i) {
    h = add(matmul(h, params[2 * i]), params[2 * i + 1]);
    if (i + 1 < layers) {
      h = activate(h, spec->hidden);
      if (!dropout_masks.empty()) {
        h = mul(h, h.graph().constant(dropout_masks[i]));
      }
    } else {
      h = activate(h, spec->output);
    }
  }
  return h;
}

Tensor Mlp::predict(const Tensor& input) const {
  if (input.cols() != spec_.input_width()) {
    throw ShapeError("mlp input width " + std::to_string(input.cols()) +
                     " does not match expected " +
                     std::to_string(spec_.input_width()));
  }
  RowMatrix h = Eigen::Map<const RowMatrix>(
      input.data().data(), static_cast<Eigen::Index>(input.rows()),
      static_cast<Eigen::Index>(input.cols()));
  const std::size_t layers = spec_.num_layers();
  for (std::size_t i = 0; i < layers; ++i) {
    const Tensor& w = params_[2 * i];
    const Tensor& b = params_[2 * i + 1];
    Eigen::Map<const RowMatrix> wm(w.data().data(),
                                   static_cast<Eigen::Index>(w.rows()),
                                   static_cast<Eigen::Index>(w.cols()));
    Eigen::Map<const Eigen::RowVectorXd> bm(b.data().data(),
                                            static_cast<Eigen::Index>(b.cols()));
    RowMatrix next = h * wm;
    next.rowwise() += bm;
    const Activation act = i + 1 < layers ? spec_.hidden : spec_.output;
    if (act == Activation::kRelu) {
      next = next.cwiseMax(0.0);
    } else if (act == Activation::kTanh) {
      next = next.array().tanh().matrix();
    }
    h = std::move(next);
  }
  Tensor out(Shape{input.rows(), spec_.output_width()});
  Eigen::Map<RowMatrix>(out.data().data(), static_cast<Eigen::Index>(out.rows()),
                        static_cast<Eigen::Index>(out.cols())) = h;
  return out;
}

std::vector<Tensor> sample_dropout_masks(const MlpSpec& spec,
                                         std::size_t batch, double rate,
                                         std::mt19937_64& rng) {
  if (rate < 0.0 || rate >= 1.0) {
    throw ConfigError("dropout rate must lie in [0, 1)");
  }
  std::vector<Tensor> masks;
  if (rate == 0.0) return masks;
  std::bernoulli_distribution keep(1.0 - rate);
  const double kept_scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 1; i + 1 < spec.widths.size(); ++i) {
    Tensor m(Shape{batch, spec.widths[i]});
    for (double& x : m.data()) x = keep(rng) ? kept_scale : 0.0;
    masks.push_back(std::move(m));
  }
  return masks;
}

void polyak_update(const Mlp& source, Mlp& target, double tau) {
  if (!(source.spec() == target.spec())) {
    throw ShapeError("polyak_update between different architectures");
  }
  for (std::size_t p = 0; p < source.params().size(); ++p) {
    const Tensor& s = source.params()[p];
    Tensor& t = target.params()[p];
    for (std::size_t i = 0; i < s.size(); ++i) {
      t[i] = tau * s[i] + (1.0 - tau) * t[i];
    }
  }
}

}  // namespace spot::autodiff
