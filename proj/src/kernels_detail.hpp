#pragma once

#include <cmath>
#include <cstddef>

// Internal: per-variant kernel tables and the scalar one-value helpers.
// SIMD variants reuse the scalar helpers for loop remainders, so for a given
// element the remainder path is bit-identical to the scalar backend.
namespace moebench::kernels::detail {

inline double sigmoid1(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double horner1(const double* c, std::size_t nc, double x) {
  double r = c[0];
  for (std::size_t j = 1; j < nc; ++j) r = r * x + c[j];
  return r;
}

struct KernelTable {
  double (*dot)(const double*, const double*, std::size_t);
  double (*sum)(const double*, std::size_t);
  double (*sumsq_diff)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*mul_add)(const double*, const double*, double*, std::size_t);
  void (*affine)(const double*, double, double, double*, std::size_t);
  void (*horner)(const double*, std::size_t, const double*, double*,
                 std::size_t);
  void (*exp_apply)(const double*, double*, std::size_t);
  void (*sigmoid_apply)(const double*, double*, std::size_t);
};

const KernelTable& scalar_table();

#ifdef MOEBENCH_HAVE_AVX2
const KernelTable& avx2_table();
bool avx2_cpu_supported();
#endif

}  // namespace moebench::kernels::detail
