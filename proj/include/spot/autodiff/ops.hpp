#pragma once

#include "spot/autodiff/graph.hpp"

// Differentiable operations on Graph nodes.
//
// Binary elementwise ops broadcast 2-D operands the usual way: each dimension
// must either match or be 1 on one side. Every op checks that its output is
// finite and throws NumericError otherwise.
namespace spot::autodiff {

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double factor);
Var add_scalar(Var a, double value);
Var neg(Var a);

Var relu(Var a);
Var tanh(Var a);
// Inverse tanh; inputs must lie in (-1, 1).
Var atanh(Var a);
Var exp(Var a);
Var log(Var a);
Var square(Var a);

// Reductions. sum/mean reduce to 1 x 1; row_sum reduces [B, n] to [B, 1].
Var sum(Var a);
Var mean(Var a);
Var row_sum(Var a);

// Elementwise log N(x; mu, exp(log_var)).
Var gaussian_log_density(Var x, Var mu, Var log_var);
// mu + exp(0.5 * log_var) * noise, noise supplied by the caller.
Var reparameterized_gaussian_sample(Var mu, Var log_var, const Tensor& noise);

// Elementwise minimum; ties route the gradient to `a`.
Var minimum(Var a, Var b);
// Elementwise clamp to [low, high]; gradient passes on the closed interval.
Var clip(Var a, double low, double high);
// Per-column clamp; `low`/`high` broadcast like a binary op operand.
Var clip(Var a, const Tensor& low, const Tensor& high);

Var concat_cols(Var a, Var b);
Var slice_cols(Var a, std::size_t begin, std::size_t end);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(Var a, Var b) { return mul(a, b); }
inline Var operator*(double s, Var a) { return scale(a, s); }
inline Var operator*(Var a, double s) { return scale(a, s); }
inline Var operator-(Var a) { return neg(a); }

}  // namespace spot::autodiff
