#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spot/autodiff/graph.hpp"
#include "spot/autodiff/tensor.hpp"

namespace spot::autodiff {

enum class Activation { kIdentity, kRelu, kTanh };

struct MlpSpec {
  // widths[0] is the input width, widths.back() the output width.
  std::vector<std::size_t> widths;
  Activation hidden = Activation::kRelu;
  Activation output = Activation::kIdentity;

  std::size_t num_layers() const { return widths.size() - 1; }
  std::size_t input_width() const { return widths.front(); }
  std::size_t output_width() const { return widths.back(); }
  bool operator==(const MlpSpec&) const = default;
};

// `num_layers` linear layers, all but the last `hidden` units wide. Three
// layers means two hidden layers plus the output layer.
MlpSpec make_mlp_spec(std::size_t input, std::size_t hidden,
                      std::size_t num_layers, std::size_t output,
                      Activation hidden_act = Activation::kRelu,
                      Activation output_act = Activation::kIdentity);

// Mlp parameters bound into a graph for one forward/backward pass.
struct BoundMlp {
  const MlpSpec* spec = nullptr;
  // Interleaved weight, bias per layer.
  std::vector<Var> params;

  // `dropout_masks` holds one [batch, width] mask per hidden layer (already
  // scaled by 1/(1-p)), or is empty for no dropout.
  Var forward(Var input, std::span<const Tensor> dropout_masks = {}) const;
};

class Mlp {
 public:
  Mlp() = default;
  // Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) initialisation of all params.
  Mlp(MlpSpec spec, std::mt19937_64& rng);
  Mlp(MlpSpec spec, std::vector<Tensor> params);

  const MlpSpec& spec() const { return spec_; }
  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  std::size_t num_scalars() const;

  // Parameter names "<prefix>.w<i>" / "<prefix>.b<i>" in params() order.
  std::vector<std::string> param_names(const std::string& prefix) const;

  BoundMlp bind(Graph& graph, bool trainable) const;

  // Graph-free forward pass; matches BoundMlp::forward without dropout.
  Tensor predict(const Tensor& input) const;

  bool operator==(const Mlp&) const = default;

 private:
  MlpSpec spec_;
  std::vector<Tensor> params_;
};

// Inverted-dropout masks for the hidden layers of `spec`.
std::vector<Tensor> sample_dropout_masks(const MlpSpec& spec,
                                         std::size_t batch, double rate,
                                         std::mt19937_64& rng);

// target <- tau * source + (1 - tau) * target, elementwise over all params.
void polyak_update(const Mlp& source, Mlp& target, double tau);

}  // namespace spot::autodiff
