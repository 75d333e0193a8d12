#include <gtest/gtest.h>

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "spot/autodiff/adam.hpp"
#include "spot/autodiff/checkpoint.hpp"
#include "spot/autodiff/graph.hpp"
#include "spot/autodiff/mlp.hpp"
#include "spot/autodiff/ops.hpp"
#include "spot/errors.hpp"
#include "support/finite_difference.hpp"

namespace {

using namespace spot::autodiff;
using spot::testing::central_difference;
using spot::testing::relative_error;

Tensor random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> dist(0.0, scale);
  Tensor t(shape);
  for (double& x : t.data()) x = dist(rng);
  return t;
}

TEST(Ops, StandardNormalLogDensityAtMean) {
  Graph g;
  Var x = g.constant(Tensor::scalar(0.0));
  Var mu = g.constant(Tensor::scalar(0.0));
  Var lv = g.constant(Tensor::scalar(0.0));
  const double expected = -0.5 * std::log(2.0 * std::numbers::pi);
  EXPECT_NEAR(gaussian_log_density(x, mu, lv).value().item(), expected, 1e-15);
  EXPECT_NEAR(expected, -0.918939, 1e-6);
}

TEST(Ops, ZeroNoiseSampleIsMean) {
  Graph g;
  Var mu = g.constant(Tensor::row({0.3, -1.7}));
  Var lv = g.constant(Tensor::row({2.0, -3.0}));
  Var z = reparameterized_gaussian_sample(mu, lv, Tensor(Shape{1, 2}, 0.0));
  EXPECT_EQ(z.value(), mu.value());
}

TEST(Ops, MeanSquareGradient) {
  Graph g;
  Var x = g.parameter(Tensor::row({1.0, 2.0, 3.0}));
  g.backward(mean(square(x)));
  const Tensor grad = g.grad(x);
  EXPECT_DOUBLE_EQ(grad[0], 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(grad[1], 4.0 / 3.0);
  EXPECT_DOUBLE_EQ(grad[2], 2.0);
}

TEST(Ops, LinearGradientIsInput) {
  Graph g;
  Var w = g.parameter(Tensor::row({0.5, -2.0, 4.0}));
  Var x = g.constant(Tensor::row({1.5, 2.5, -3.5}));
  g.backward(sum(w * x));
  EXPECT_EQ(g.grad(w), x.value());
}

TEST(Ops, UnreachableLeafHasZeroGrad) {
  Graph g;
  Var a = g.parameter(Tensor::row({1.0, 2.0}));
  Var b = g.parameter(Tensor::row({3.0, 4.0}));
  g.backward(sum(square(a)));
  EXPECT_EQ(g.grad(b), Tensor(Shape{1, 2}, 0.0));
}

TEST(Ops, NonScalarLossIsContractError) {
  Graph g;
  Var a = g.parameter(Tensor::row({1.0, 2.0}));
  EXPECT_THROW(g.backward(square(a)), spot::ContractError);
}

TEST(Ops, RepeatedBackwardIsContractError) {
  Graph g;
  Var a = g.parameter(Tensor::row({1.0, 2.0}));
  Var loss = sum(a);
  g.backward(loss);
  EXPECT_THROW(g.backward(loss), spot::ContractError);
  g.clear();
  Var b = g.parameter(Tensor::row({1.0}));
  EXPECT_NO_THROW(g.backward(sum(b)));
}

TEST(Ops, ShapeMismatchNamesBothShapes) {
  Graph g;
  Var a = g.constant(Tensor(Shape{2, 3}));
  Var b = g.constant(Tensor(Shape{4, 5}));
  try {
    matmul(a, b);
    FAIL() << "expected ShapeError";
  } catch (const spot::ShapeError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("[2, 3]"), std::string::npos) << msg;
    EXPECT_NE(msg.find("[4, 5]"), std::string::npos) << msg;
  }
  EXPECT_THROW(add(g.constant(Tensor(Shape{2, 3})), g.constant(Tensor(Shape{3, 2}))),
               spot::ShapeError);
}

TEST(Ops, NonFiniteIsNumericError) {
  Graph g;
  EXPECT_THROW(g.constant(Tensor::scalar(std::nan(""))), spot::NumericError);
  Var neg = g.constant(Tensor::scalar(-1.0));
  EXPECT_THROW(log(neg), spot::NumericError);
  Var big = g.constant(Tensor::scalar(1e6));
  EXPECT_THROW(exp(big), spot::NumericError);
}

TEST(Ops, BroadcastGradientsReduce) {
  Graph g;
  Var x = g.parameter(Tensor(Shape{3, 2}, 1.0));
  Var row = g.parameter(Tensor::row({2.0, -1.0}));
  Var col = g.parameter(Tensor(Shape{3, 1}, 0.5));
  g.backward(sum(mul(add(x, row), col)));
  EXPECT_EQ(g.grad(row), Tensor::row({1.5, 1.5}));
  const Tensor gc = g.grad(col);
  EXPECT_DOUBLE_EQ(gc[0], (1.0 + 2.0) + (1.0 - 1.0));
  EXPECT_EQ(g.grad(x), Tensor(Shape{3, 2}, 0.5));
}

TEST(Ops, MinimumAndClipRouting) {
  Graph g;
  Var a = g.parameter(Tensor::row({1.0, 5.0, 2.0}));
  Var b = g.parameter(Tensor::row({3.0, 4.0, 2.0}));
  Var m = minimum(a, b);
  EXPECT_EQ(m.value(), Tensor::row({1.0, 4.0, 2.0}));
  Var c = clip(a, 1.5, 4.5);
  EXPECT_EQ(c.value(), Tensor::row({1.5, 4.5, 2.0}));
  g.backward(sum(m) + sum(c));
  EXPECT_EQ(g.grad(a), Tensor::row({1.0, 0.0, 2.0}));
  EXPECT_EQ(g.grad(b), Tensor::row({0.0, 1.0, 0.0}));
}

TEST(Ops, FanOutGradientsAdd) {
  std::mt19937_64 rng(11);
  const Tensor x0 = random_tensor(Shape{4, 3}, rng);
  auto grad_of = [&](auto build) {
    Graph g;
    Var x = g.parameter(x0);
    g.backward(build(x));
    return g.grad(x);
  };
  auto f = [](Var x) { return sum(tanh(x) * x); };
  auto h = [](Var x) { return mean(exp(scale(x, 0.3))); };
  const Tensor gf = grad_of(f);
  const Tensor gh = grad_of(h);
  const Tensor gsum = grad_of([&](Var x) { return f(x) + h(x); });
  for (std::size_t i = 0; i < gsum.size(); ++i) {
    EXPECT_NEAR(gsum[i], gf[i] + gh[i], 1e-14);
  }
}

// Each differentiable op against central differences on random inputs.
TEST(Ops, EveryOpMatchesFiniteDifferences) {
  std::mt19937_64 rng(2024);
  using Builder = std::function<Var(Graph&, const std::vector<Var>&)>;
  struct Case {
    const char* name;
    std::vector<Shape> shapes;
    Builder build;
  };
  const Tensor noise = random_tensor(Shape{3, 2}, rng);
  const std::vector<Case> cases = {
      {"matmul", {{3, 4}, {4, 2}},
       [](Graph&, const std::vector<Var>& v) { return matmul(v[0], v[1]); }},
      {"add_row", {{3, 2}, {1, 2}},
       [](Graph&, const std::vector<Var>& v) { return add(v[0], v[1]); }},
      {"sub_col", {{3, 2}, {3, 1}},
       [](Graph&, const std::vector<Var>& v) { return sub(v[0], v[1]); }},
      {"mul", {{3, 2}, {3, 2}},
       [](Graph&, const std::vector<Var>& v) { return mul(v[0], v[1]); }},
      {"tanh", {{3, 2}},
       [](Graph&, const std::vector<Var>& v) { return tanh(v[0]); }},
      {"atanh", {{3, 2}},
       [](Graph&, const std::vector<Var>& v) { return atanh(scale(tanh(v[0]), 0.8)); }},
      {"exp", {{3, 2}},
       [](Graph&, const std::vector<Var>& v) { return exp(v[0]); }},
      {"log", {{3, 2}},
       [](Graph&, const std::vector<Var>& v) {
         return log(add_scalar(square(v[0]), 0.5));
       }},
      {"row_sum", {{3, 2}},
       [](Graph&, const std::vector<Var>& v) { return row_sum(square(v[0])); }},
      {"gaussian_log_density", {{3, 2}, {3, 2}, {1, 2}},
       [](Graph&, const std::vector<Var>& v) {
         return gaussian_log_density(v[0], v[1], v[2]);
       }},
      {"reparameterized", {{3, 2}, {3, 2}},
       [noise](Graph&, const std::vector<Var>& v) {
         return reparameterized_gaussian_sample(v[0], v[1], noise);
       }},
      {"concat_slice", {{3, 2}, {3, 1}},
       [](Graph&, const std::vector<Var>& v) {
         return slice_cols(concat_cols(v[0], v[1]), 1, 3);
       }},
  };
  for (const Case& c : cases) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<Tensor> params;
      for (Shape s : c.shapes) params.push_back(random_tensor(s, rng));
      const Tensor weights = [&] {
        Graph g;
        std::vector<Var> vars;
        for (const Tensor& p : params) vars.push_back(g.constant(p));
        return random_tensor(c.build(g, vars).shape(), rng);
      }();
      auto loss_and_grads = [&](bool want_grads) {
        Graph g;
        std::vector<Var> vars;
        for (const Tensor& p : params) vars.push_back(g.parameter(p));
        Var loss = sum(c.build(g, vars) * g.constant(weights));
        if (want_grads) g.backward(loss);
        return std::make_pair(loss.value().item(), g.grads(vars));
      };
      const auto analytic = loss_and_grads(true).second;
      const auto numeric = central_difference(
          params, [&] { return loss_and_grads(false).first; });
      EXPECT_LT(relative_error(analytic, numeric), 1e-7) << c.name;
    }
  }
}

TEST(Mlp, ShapesComposeAndPredictMatchesGraph) {
  std::mt19937_64 rng(3);
  const Mlp mlp(make_mlp_spec(5, 16, 3, 2, Activation::kRelu, Activation::kTanh),
                rng);
  ASSERT_EQ(mlp.params().size(), 6u);
  EXPECT_EQ(mlp.params()[0].shape(), (Shape{5, 16}));
  EXPECT_EQ(mlp.params()[2].shape(), (Shape{16, 16}));
  EXPECT_EQ(mlp.params()[4].shape(), (Shape{16, 2}));
  const Tensor x = random_tensor(Shape{7, 5}, rng);
  Graph g;
  Var y = mlp.bind(g, false).forward(g.constant(x));
  EXPECT_EQ(y.shape(), (Shape{7, 2}));
  const Tensor p = mlp.predict(x);
  for (std::size_t i = 0; i < p.size(); ++i) {
    EXPECT_NEAR(p[i], y.value()[i], 1e-14);
  }
}

TEST(Mlp, TwoLayerGradientsMatchFiniteDifferences) {
  std::mt19937_64 rng(99);
  for (Activation act : {Activation::kRelu, Activation::kTanh}) {
    for (int trial = 0; trial < 10; ++trial) {
      Mlp mlp(make_mlp_spec(3, 8, 2, 2, act), rng);
      const Tensor x = random_tensor(Shape{6, 3}, rng);
      const Tensor target = random_tensor(Shape{6, 2}, rng);
      auto loss_of = [&](Graph& g, const BoundMlp& bound) {
        return mean(square(bound.forward(g.constant(x)) - g.constant(target)));
      };
      Graph g;
      BoundMlp bound = mlp.bind(g, true);
      g.backward(loss_of(g, bound));
      const auto analytic = g.grads(bound.params);
      const auto numeric = central_difference(mlp.params(), [&] {
        Graph h;
        return loss_of(h, mlp.bind(h, false)).value().item();
      });
      EXPECT_LT(relative_error(analytic, numeric), 1e-4);
    }
  }
}

TEST(Mlp, DeterministicGradients) {
  auto run = [] {
    std::mt19937_64 rng(5);
    Mlp mlp(make_mlp_spec(4, 32, 3, 1), rng);
    const Tensor x = random_tensor(Shape{16, 4}, rng);
    const auto masks = sample_dropout_masks(mlp.spec(), 16, 0.1, rng);
    Graph g;
    BoundMlp b = mlp.bind(g, true);
    g.backward(mean(b.forward(g.constant(x), masks)));
    return g.grads(b.params);
  };
  EXPECT_EQ(run(), run());
}

TEST(Mlp, PolyakUpdateIsExactConvexCombination) {
  std::mt19937_64 rng(8);
  const Mlp online(make_mlp_spec(2, 4, 2, 1), rng);
  Mlp target(make_mlp_spec(2, 4, 2, 1), rng);
  const Mlp before = target;
  polyak_update(online, target, 0.005);
  for (std::size_t p = 0; p < target.params().size(); ++p) {
    for (std::size_t i = 0; i < target.params()[p].size(); ++i) {
      EXPECT_EQ(target.params()[p][i], 0.005 * online.params()[p][i] +
                                           0.995 * before.params()[p][i]);
    }
  }
}

TEST(Adam, ZeroGradientIsFixedPoint) {
  std::vector<Tensor> params{Tensor::row({1.0, -2.0}), Tensor::scalar(3.0)};
  const auto before = params;
  AdamState state = AdamState::zeros_like(params);
  const std::vector<Tensor> grads{Tensor(Shape{1, 2}, 0.0), Tensor::scalar(0.0)};
  for (int i = 0; i < 5; ++i) adam_step(params, grads, state, AdamConfig{});
  EXPECT_EQ(params, before);
}

TEST(Adam, FirstStepMatchesHandExpansion) {
  // m1 = (1-b1) g, v1 = (1-b2) g^2, so m_hat = g and v_hat = g^2 and the
  // first step is lr * g / (|g| + eps) = lr / (1 + eps) for g = 1.
  std::vector<Tensor> params{Tensor::scalar(0.0)};
  AdamState state = AdamState::zeros_like(params);
  AdamConfig config;
  config.lr = 0.1;
  adam_step(params, std::vector<Tensor>{Tensor::scalar(1.0)}, state, config);
  EXPECT_NEAR(params[0].item(), -0.1 * (1.0 / (1.0 + 1e-8)), 1e-16);
  EXPECT_EQ(state.step, 1);
}

TEST(Adam, IdenticalInputsGiveIdenticalUpdates) {
  std::mt19937_64 rng(1);
  std::vector<Tensor> a{random_tensor(Shape{3, 3}, rng)};
  std::vector<Tensor> b = a;
  const std::vector<Tensor> grads{random_tensor(Shape{3, 3}, rng)};
  AdamState sa = AdamState::zeros_like(a), sb = AdamState::zeros_like(b);
  for (int i = 0; i < 3; ++i) {
    adam_step(a, grads, sa, AdamConfig{});
    adam_step(b, grads, sb, AdamConfig{});
  }
  EXPECT_EQ(a, b);
  EXPECT_EQ(sa, sb);
}

TEST(Adam, ShapeMismatchThrows) {
  std::vector<Tensor> params{Tensor(Shape{2, 2})};
  AdamState state = AdamState::zeros_like(params);
  EXPECT_THROW(adam_step(params, std::vector<Tensor>{Tensor(Shape{1, 4})}, state,
                         AdamConfig{}),
               spot::ShapeError);
}

TEST(Checkpoint, RoundTripIsBitwise) {
  std::mt19937_64 rng(4);
  std::vector<NamedTensor> ts{{"actor.w0", random_tensor(Shape{3, 5}, rng)},
                              {"actor.b0", random_tensor(Shape{1, 5}, rng)},
                              {"tiny", Tensor::scalar(-0.0)}};
  std::stringstream buf;
  write_checkpoint(buf, ts);
  EXPECT_EQ(read_checkpoint(buf), ts);
}

TEST(Checkpoint, CorruptInputsAreFormatErrors) {
  std::vector<NamedTensor> ts{{"w", Tensor::row({1.0, 2.0})}};
  std::stringstream buf;
  write_checkpoint(buf, ts);
  const std::string bytes = buf.str();

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::stringstream s1(bad_magic);
  EXPECT_THROW(read_checkpoint(s1), spot::FormatError);

  std::string bad_version = bytes;
  bad_version[8] = 9;
  std::stringstream s2(bad_version);
  EXPECT_THROW(read_checkpoint(s2), spot::FormatError);

  std::stringstream s3(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_checkpoint(s3), spot::FormatError);
}

}  // namespace
