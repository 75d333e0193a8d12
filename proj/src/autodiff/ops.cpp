#include "spot/autodiff/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spot/errors.hpp"

namespace spot::autodiff {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using ConstMatMap = Eigen::Map<const RowMatrix>;

MatMap as_matrix(Tensor& t) {
  return MatMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                static_cast<Eigen::Index>(t.cols()));
}

ConstMatMap as_matrix(const Tensor& t) {
  return ConstMatMap(t.data().data(), static_cast<Eigen::Index>(t.rows()),
                     static_cast<Eigen::Index>(t.cols()));
}

std::size_t broadcast_dim(const char* op, Shape a, Shape b, std::size_t x,
                          std::size_t y) {
  if (x == y) return x;
  if (x == 1) return y;
  if (y == 1) return x;
  throw ShapeError(std::string(op) + ": cannot broadcast shapes " +
                   to_string(a) + " and " + to_string(b));
}

Shape broadcast_shape(const char* op, Shape a, Shape b) {
  return Shape{broadcast_dim(op, a, b, a.rows, b.rows),
               broadcast_dim(op, a, b, a.cols, b.cols)};
}

// Strides that map an output index onto a (possibly broadcast) operand.
struct Strides {
  std::size_t row;
  std::size_t col;

  explicit Strides(Shape s)
      : row(s.rows == 1 ? 0 : s.cols), col(s.cols == 1 ? 0 : 1) {}
};

// Calls f(out_index, a_index, b_index) over the broadcast output.
template <class F>
void for_each_pair(Shape out, Shape a, Shape b, F&& f) {
  const Strides sa(a);
  const Strides sb(b);
  std::size_t o = 0;
  for (std::size_t r = 0; r < out.rows; ++r) {
    for (std::size_t c = 0; c < out.cols; ++c, ++o) {
      f(o, r * sa.row + c * sa.col, r * sb.row + c * sb.col);
    }
  }
}

template <class F>
Tensor map_binary(const char* op, const Tensor& a, const Tensor& b, F&& f) {
  const Shape out = broadcast_shape(op, a.shape(), b.shape());
  Tensor result(out);
  for_each_pair(out, a.shape(), b.shape(),
                [&](std::size_t o, std::size_t ia, std::size_t ib) {
                  result[o] = f(a[ia], b[ib]);
                });
  return result;
}

template <class F>
Tensor map_unary(const Tensor& a, F&& f) {
  Tensor result(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) result[i] = f(a[i]);
  return result;
}

// Unary op whose derivative is a function of the input.
template <class Fwd, class Deriv>
Var unary_op(const char* name, Var a, Fwd&& fwd, Deriv&& deriv) {
  Graph& g = a.graph();
  Tensor out = map_unary(a.value(), fwd);
  const std::size_t ia = a.id();
  auto backward = [ia, deriv](Graph& graph, const Tensor& og) {
    const Tensor& x = graph.value(Var(&graph, ia));
    Tensor& ga = graph.grad_buffer(ia);
    for (std::size_t i = 0; i < og.size(); ++i) ga[i] += og[i] * deriv(x[i]);
  };
  return g.record(name, std::move(out), {a}, std::move(backward));
}

void check_same_graph(const char* op, Var a, Var b) {
  if (&a.graph() != &b.graph()) {
    throw ContractError(std::string(op) + ": operands from different graphs");
  }
}

}  // namespace

Var matmul(Var a, Var b) {
  check_same_graph("matmul", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dimensions differ for shapes " +
                     to_string(av.shape()) + " and " + to_string(bv.shape()));
  }
  Tensor out(Shape{av.rows(), bv.cols()});
  as_matrix(out).noalias() = as_matrix(av) * as_matrix(bv);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  const bool need_a = a.requires_grad();
  const bool need_b = b.requires_grad();
  return a.graph().record(
      "matmul", std::move(out), {a, b},
      [ia, ib, need_a, need_b](Graph& g, const Tensor& og) {
        const auto grad = as_matrix(og);
        if (need_a) {
          const Tensor& bv = g.value(Var(&g, ib));
          as_matrix(g.grad_buffer(ia)).noalias() +=
              grad * as_matrix(bv).transpose();
        }
        if (need_b) {
          const Tensor& av = g.value(Var(&g, ia));
          as_matrix(g.grad_buffer(ib)).noalias() +=
              as_matrix(av).transpose() * grad;
        }
      });
}

Var add(Var a, Var b) {
  check_same_graph("add", a, b);
  Tensor out = map_binary("add", a.value(), b.value(),
                          [](double x, double y) { return x + y; });
  const std::size_t ia = a.id(), ib = b.id();
  const Shape sa = a.shape(), sb = b.shape();
  const bool need_a = a.requires_grad(), need_b = b.requires_grad();
  return a.graph().record(
      "add", std::move(out), {a, b},
      [=](Graph& g, const Tensor& og) {
        if (need_a) {
          Tensor& ga = g.grad_buffer(ia);
          for_each_pair(og.shape(), sa, sb,
                        [&](std::size_t o, std::size_t i, std::size_t) {
                          ga[i] += og[o];
                        });
        }
        if (need_b) {
          Tensor& gb = g.grad_buffer(ib);
          for_each_pair(og.shape(), sa, sb,
                        [&](std::size_t o, std::size_t, std::size_t j) {
                          gb[j] += og[o];
                        });
        }
      });
}

Var sub(Var a, Var b) {
  check_same_graph("sub", a, b);
  Tensor out = map_binary("sub", a.value(), b.value(),
                          [](double x, double y) { return x - y; });
  const std::size_t ia = a.id(), ib = b.id();
  const Shape sa = a.shape(), sb = b.shape();
  const bool need_a = a.requires_grad(), need_b = b.requires_grad();
  return a.graph().record(
      "sub", std::move(out), {a, b},
      [=](Graph& g, const Tensor& og) {
        if (need_a) {
          Tensor& ga = g.grad_buffer(ia);
          for_each_pair(og.shape(), sa, sb,
                        [&](std::size_t o, std::size_t i, std::size_t) {
                          ga[i] += og[o];
                        });
        }
        if (need_b) {
          Tensor& gb = g.grad_buffer(ib);
          for_each_pair(og.shape(), sa, sb,
                        [&](std::size_t o, std::size_t, std::size_t j) {
                          gb[j] -= og[o];
                        });
        }
      });
}

Var mul(Var a, Var b) {
  check_same_graph("mul", a, b);
  Tensor out = map_binary("mul", a.value(), b.value(),
                          [](double x, double y) { return x * y; });
  const std::size_t ia = a.id(), ib = b.id();
  const Shape sa = a.shape(), sb = b.shape();
  const bool need_a = a.requires_grad(), need_b = b.requires_grad();
  return a.graph().record(
      "mul", std::move(out), {a, b},
      [=](Graph& g, const Tensor& og) {
        const Tensor& av = g.value(Var(&g, ia));
        const Tensor& bv = g.value(Var(&g, ib));
        if (need_a) {
          Tensor& ga = g.grad_buffer(ia);
          for_each_pair(og.shape(), sa, sb,
                        [&](std::size_t o, std::size_t i, std::size_t j) {
                          ga[i] += og[o] * bv[j];
                        });
        }
        if (need_b) {
          Tensor& gb = g.grad_buffer(ib);
          for_each_pair(og.shape(), sa, sb,
                        [&](std::size_t o, std::size_t i, std::size_t j) {
                          gb[j] += og[o] * av[i];
                        });
        }
      });
}

Var scale(Var a, double factor) {
  return unary_op(
      "scale", a, [factor](double x) { return factor * x; },
      [factor](double) { return factor; });
}

Var add_scalar(Var a, double value) {
  return unary_op(
      "add_scalar", a, [value](double x) { return x + value; },
      [](double) { return 1.0; });
}

Var neg(Var a) {
  return unary_op(
      "neg", a, [](double x) { return -x; }, [](double) { return -1.0; });
}

Var relu(Var a) {
  return unary_op(
      "relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x) { return x > 0.0 ? 1.0 : 0.0; });
}

Var tanh(Var a) {
  return unary_op(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double x) {
        const double t = std::tanh(x);
        return 1.0 - t * t;
      });
}

Var atanh(Var a) {
  return unary_op(
      "atanh", a, [](double x) { return std::atanh(x); },
      [](double x) { return 1.0 / (1.0 - x * x); });
}

Var exp(Var a) {
  return unary_op(
      "exp", a, [](double x) { return std::exp(x); },
      [](double x) { return std::exp(x); });
}

Var log(Var a) {
  return unary_op(
      "log", a, [](double x) { return std::log(x); },
      [](double x) { return 1.0 / x; });
}

Var square(Var a) {
  return unary_op(
      "square", a, [](double x) { return x * x; },
      [](double x) { return 2.0 * x; });
}

Var sum(Var a) {
  const Tensor& av = a.value();
  double total = 0.0;
  for (double x : av.data()) total += x;
  const std::size_t ia = a.id();
  return a.graph().record("sum", Tensor::scalar(total), {a},
                          [ia](Graph& g, const Tensor& og) {
                            Tensor& ga = g.grad_buffer(ia);
                            const double s = og[0];
                            for (double& x : ga.data()) x += s;
                          });
}

Var mean(Var a) {
  const Tensor& av = a.value();
  if (av.empty()) throw ShapeError("mean of an empty tensor");
  double total = 0.0;
  for (double x : av.data()) total += x;
  const double n = static_cast<double>(av.size());
  const std::size_t ia = a.id();
  return a.graph().record("mean", Tensor::scalar(total / n), {a},
                          [ia, n](Graph& g, const Tensor& og) {
                            Tensor& ga = g.grad_buffer(ia);
                            const double s = og[0] / n;
                            for (double& x : ga.data()) x += s;
                          });
}

Var row_sum(Var a) {
  const Tensor& av = a.value();
  Tensor out(Shape{av.rows(), 1});
  for (std::size_t r = 0; r < av.rows(); ++r) {
    double total = 0.0;
    for (double x : av.row_span(r)) total += x;
    out[r] = total;
  }
  const std::size_t ia = a.id();
  return a.graph().record("row_sum", std::move(out), {a},
                          [ia](Graph& g, const Tensor& og) {
                            Tensor& ga = g.grad_buffer(ia);
                            for (std::size_t r = 0; r < ga.rows(); ++r) {
                              for (double& x : ga.row_span(r)) x += og[r];
                            }
                          });
}

Var gaussian_log_density(Var x, Var mu, Var log_var) {
  check_same_graph("gaussian_log_density", x, mu);
  check_same_graph("gaussian_log_density", x, log_var);
  const Tensor& xv = x.value();
  const Tensor& mv = mu.value();
  const Tensor& lv = log_var.value();
  if (!lv.all_finite()) {
    throw NumericError("gaussian_log_density: log variance must be finite");
  }
  const Shape s1 = broadcast_shape("gaussian_log_density", xv.shape(),
                                   mv.shape());
  const Shape out_shape =
      broadcast_shape("gaussian_log_density", s1, lv.shape());
  const Strides sx(xv.shape()), sm(mv.shape()), sl(lv.shape());
  constexpr double kLog2Pi = 1.8378770664093454835606594728112;
  Tensor out(out_shape);
  for (std::size_t r = 0, o = 0; r < out_shape.rows; ++r) {
    for (std::size_t c = 0; c < out_shape.cols; ++c, ++o) {
      const double d = xv[r * sx.row + c * sx.col] - mv[r * sm.row + c * sm.col];
      const double l = lv[r * sl.row + c * sl.col];
      out[o] = -0.5 * (kLog2Pi + l + d * d * std::exp(-l));
    }
  }
  const std::size_t ix = x.id(), im = mu.id(), il = log_var.id();
  const Shape shx = xv.shape(), shm = mv.shape(), shl = lv.shape();
  const bool need_x = x.requires_grad(), need_m = mu.requires_grad(),
             need_l = log_var.requires_grad();
  return x.graph().record(
      "gaussian_log_density", std::move(out), {x, mu, log_var},
      [=](Graph& g, const Tensor& og) {
        const Tensor& xv = g.value(Var(&g, ix));
        const Tensor& mv = g.value(Var(&g, im));
        const Tensor& lv = g.value(Var(&g, il));
        const Strides sx(shx), sm(shm), sl(shl);
        Tensor* gx = need_x ? &g.grad_buffer(ix) : nullptr;
        Tensor* gm = need_m ? &g.grad_buffer(im) : nullptr;
        Tensor* gl = need_l ? &g.grad_buffer(il) : nullptr;
        const Shape os = og.shape();
        for (std::size_t r = 0, o = 0; r < os.rows; ++r) {
          for (std::size_t c = 0; c < os.cols; ++c, ++o) {
            const std::size_t jx = r * sx.row + c * sx.col;
            const std::size_t jm = r * sm.row + c * sm.col;
            const std::size_t jl = r * sl.row + c * sl.col;
            const double d = xv[jx] - mv[jm];
            const double inv_var = std::exp(-lv[jl]);
            if (gx) (*gx)[jx] -= og[o] * d * inv_var;
            if (gm) (*gm)[jm] += og[o] * d * inv_var;
            if (gl) (*gl)[jl] += og[o] * (0.5 * d * d * inv_var - 0.5);
          }
        }
      });
}

Var reparameterized_gaussian_sample(Var mu, Var log_var, const Tensor& noise) {
  check_same_graph("reparameterized_gaussian_sample", mu, log_var);
  const Tensor& mv = mu.value();
  const Tensor& lv = log_var.value();
  if (mv.shape() != lv.shape() || mv.shape() != noise.shape()) {
    throw ShapeError("reparameterized_gaussian_sample: shapes " +
                     to_string(mv.shape()) + ", " + to_string(lv.shape()) +
                     " and noise " + to_string(noise.shape()) + " differ");
  }
  if (!noise.all_finite()) {
    throw NumericError("reparameterized_gaussian_sample: non-finite noise");
  }
  Tensor out(mv.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = mv[i] + std::exp(0.5 * lv[i]) * noise[i];
  }
  const std::size_t im = mu.id(), il = log_var.id();
  const bool need_m = mu.requires_grad(), need_l = log_var.requires_grad();
  return mu.graph().record(
      "reparameterized_gaussian_sample", std::move(out), {mu, log_var},
      [=](Graph& g, const Tensor& og) {
        if (need_m) {
          Tensor& gm = g.grad_buffer(im);
          for (std::size_t i = 0; i < og.size(); ++i) gm[i] += og[i];
        }
        if (need_l) {
          const Tensor& lv = g.value(Var(&g, il));
          Tensor& gl = g.grad_buffer(il);
          for (std::size_t i = 0; i < og.size(); ++i) {
            gl[i] += og[i] * 0.5 * std::exp(0.5 * lv[i]) * noise[i];
          }
        }
      });
}

Var minimum(Var a, Var b) {
  check_same_graph("minimum", a, b);
  Tensor out = map_binary("minimum", a.value(), b.value(),
                          [](double x, double y) { return y < x ? y : x; });
  const std::size_t ia = a.id(), ib = b.id();
  const Shape sa = a.shape(), sb = b.shape();
  const bool need_a = a.requires_grad(), need_b = b.requires_grad();
  return a.graph().record(
      "minimum", std::move(out), {a, b},
      [=](Graph& g, const Tensor& og) {
        const Tensor& av = g.value(Var(&g, ia));
        const Tensor& bv = g.value(Var(&g, ib));
        Tensor* ga = need_a ? &g.grad_buffer(ia) : nullptr;
        Tensor* gb = need_b ? &g.grad_buffer(ib) : nullptr;
        for_each_pair(og.shape(), sa, sb,
                      [&](std::size_t o, std::size_t i, std::size_t j) {
                        if (bv[j] < av[i]) {
                          if (gb) (*gb)[j] += og[o];
                        } else if (ga) {
                          (*ga)[i] += og[o];
                        }
                      });
      });
}

Var clip(Var a, double low, double high) {
  return clip(a, Tensor::scalar(low), Tensor::scalar(high));
}

Var clip(Var a, const Tensor& low, const Tensor& high) {
  const Tensor& av = a.value();
  const Shape sl = broadcast_shape("clip", av.shape(), low.shape());
  const Shape sh = broadcast_shape("clip", av.shape(), high.shape());
  if (sl != av.shape() || sh != av.shape()) {
    throw ShapeError("clip: bounds " + to_string(low.shape()) + " / " +
                     to_string(high.shape()) + " do not broadcast to " +
                     to_string(av.shape()));
  }
  const Strides s_lo(low.shape()), s_hi(high.shape());
  Tensor out(av.shape());
  Tensor pass(av.shape());
  for (std::size_t r = 0, o = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c, ++o) {
      const double lo = low[r * s_lo.row + c * s_lo.col];
      const double hi = high[r * s_hi.row + c * s_hi.col];
      if (lo > hi) throw ContractError("clip: low bound exceeds high bound");
      out[o] = std::clamp(av[o], lo, hi);
      pass[o] = (av[o] >= lo && av[o] <= hi) ? 1.0 : 0.0;
    }
  }
  const std::size_t ia = a.id();
  return a.graph().record("clip", std::move(out), {a},
                          [ia, pass = std::move(pass)](Graph& g,
                                                       const Tensor& og) {
                            Tensor& ga = g.grad_buffer(ia);
                            for (std::size_t i = 0; i < og.size(); ++i) {
                              ga[i] += og[i] * pass[i];
                            }
                          });
}

Var concat_cols(Var a, Var b) {
  check_same_graph("concat_cols", a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.rows() != bv.rows()) {
    throw ShapeError("concat_cols: row counts differ for shapes " +
                     to_string(av.shape()) + " and " + to_string(bv.shape()));
  }
  const std::size_t ca = av.cols(), cb = bv.cols();
  Tensor out(Shape{av.rows(), ca + cb});
  for (std::size_t r = 0; r < av.rows(); ++r) {
    std::copy_n(av.row_span(r).begin(), ca, out.row_span(r).begin());
    std::copy_n(bv.row_span(r).begin(), cb, out.row_span(r).begin() + ca);
  }
  const std::size_t ia = a.id(), ib = b.id();
  const bool need_a = a.requires_grad(), need_b = b.requires_grad();
  return a.graph().record(
      "concat_cols", std::move(out), {a, b},
      [=](Graph& g, const Tensor& og) {
        for (std::size_t r = 0; r < og.rows(); ++r) {
          auto src = og.row_span(r);
          if (need_a) {
            auto dst = g.grad_buffer(ia).row_span(r);
            for (std::size_t c = 0; c < ca; ++c) dst[c] += src[c];
          }
          if (need_b) {
            auto dst = g.grad_buffer(ib).row_span(r);
            for (std::size_t c = 0; c < cb; ++c) dst[c] += src[ca + c];
          }
        }
      });
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Tensor& av = a.value();
  if (begin >= end || end > av.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " +
                     std::to_string(end) + ") invalid for shape " +
                     to_string(av.shape()));
  }
  const std::size_t width = end - begin;
  Tensor out(Shape{av.rows(), width});
  for (std::size_t r = 0; r < av.rows(); ++r) {
    std::copy_n(av.row_span(r).begin() + begin, width,
                out.row_span(r).begin());
  }
  const std::size_t ia = a.id();
  return a.graph().record(
      "slice_cols", std::move(out), {a},
      [ia, begin, width](Graph& g, const Tensor& og) {
        Tensor& ga = g.grad_buffer(ia);
        for (std::size_t r = 0; r < og.rows(); ++r) {
          auto dst = ga.row_span(r);
          auto src = og.row_span(r);
          for (std::size_t c = 0; c < width; ++c) dst[begin + c] += src[c];
        }
      });
}

}  // namespace spot::autodiff
