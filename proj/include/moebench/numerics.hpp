#pragma once

#include <functional>

#include "moebench/linalg.hpp"

// Stable scalar/vector primitives shared by the models. Convention used
// throughout: a logit of -infinity marks an entry excluded from a softmax and
// maps to probability exactly 0.
namespace moebench {

// exp(z_i - max z) / sum over finite entries; -inf entries give exactly 0.
// Throws std::invalid_argument if z is empty or has no finite entry.
Vector softmax(const Vector& z);

// 1 / (1 + exp(-x)), computed on the non-overflowing branch.
double sigmoid(double x);

// log(1 + exp(x)) without overflow for large |x|.
double softplus(double x);
// d softplus / dx = sigmoid(x)
double softplus_grad(double x);

// log sum_i exp(v_i) with max subtraction; all--inf input gives -inf.
double logsumexp(const Vector& v);

// log N(x | mean, std^2); std must be positive.
double normal_logpdf(double x, double mean, double std_dev);

// Central differences, (f(x+h e_i) - f(x - h e_i)) / 2h per coordinate.
Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& x, double h = 1e-6);

}  // namespace moebench
