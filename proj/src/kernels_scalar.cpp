#include <cmath>
#include <cstddef>

#include "kernels_detail.hpp"

namespace moebench::kernels::detail {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq_diff_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void mul_add_scalar(const double* a, const double* b, double* acc,
                    std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += a[i] * b[i];
}

void affine_scalar(const double* x, double scale, double shift, double* y,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = scale * x[i] + shift;
}

void horner_scalar(const double* coeffs, std::size_t ncoeffs, const double* x,
                   double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = horner1(coeffs, ncoeffs, x[i]);
}

void exp_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::exp(x[i]);
}

void sigmoid_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = sigmoid1(x[i]);
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t = {
      dot_scalar,    sum_scalar,    sumsq_diff_scalar,
      axpy_scalar,   mul_add_scalar, affine_scalar,
      horner_scalar, exp_scalar,     sigmoid_scalar,
  };
  return t;
}

}  // namespace moebench::kernels::detail
