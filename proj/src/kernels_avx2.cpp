#ifdef MOEBENCH_HAVE_AVX2

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "kernels_detail.hpp"

namespace moebench::kernels::detail {
namespace {

double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4),
                           _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                           acc0);
  }
  double r = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) r += a[i] * b[i];
  return r;
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
    acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(x + i + 4));
  }
  for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(x + i));
  double r = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) r += x[i];
  return r;
}

double sumsq_diff_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4),
                               _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d, d, acc0);
  }
  double r = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    r += d * d;
  }
  return r;
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                 _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void mul_add_avx2(const double* a, const double* b, double* acc,
                  std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i),
                                _mm256_loadu_pd(acc + i));
    _mm256_storeu_pd(acc + i, v);
  }
  for (; i < n; ++i) acc[i] += a[i] * b[i];
}

void affine_avx2(const double* x, double scale, double shift, double* y,
                 std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  const __m256d vb = _mm256_set1_pd(shift);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(vs, _mm256_loadu_pd(x + i), vb));
  }
  for (; i < n; ++i) y[i] = scale * x[i] + shift;
}

void horner_avx2(const double* coeffs, std::size_t ncoeffs, const double* x,
                 double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    __m256d r = _mm256_set1_pd(coeffs[0]);
    for (std::size_t j = 1; j < ncoeffs; ++j) {
      r = _mm256_fmadd_pd(r, vx, _mm256_set1_pd(coeffs[j]));
    }
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] = horner1(coeffs, ncoeffs, x[i]);
}

// exp via range reduction exp(x) = 2^n * exp(r), |r| <= ln(2)/2, with the
// Cephes rational approximation exp(r) ~= 1 + 2*p/(q - p). Inputs are clamped
// to [-708, 708], so out-of-range arguments saturate instead of reaching
// 0/inf. About 1-2 ulp relative error in range; NaN inputs are not handled.
__m256d exp4(__m256d x) {
  const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
  const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
  const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
  const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
  const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
  const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
  const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
  const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
  const __m256d q3 = _mm256_set1_pd(2.0);
  const __m256d one = _mm256_set1_pd(1.0);

  x = _mm256_min_pd(_mm256_max_pd(x, _mm256_set1_pd(-708.0)),
                    _mm256_set1_pd(708.0));
  const __m256d n =
      _mm256_floor_pd(_mm256_fmadd_pd(x, log2e, _mm256_set1_pd(0.5)));
  x = _mm256_fnmadd_pd(n, c1, x);
  x = _mm256_fnmadd_pd(n, c2, x);

  const __m256d xx = _mm256_mul_pd(x, x);
  __m256d p = _mm256_fmadd_pd(p0, xx, p1);
  p = _mm256_fmadd_pd(p, xx, p2);
  p = _mm256_mul_pd(p, x);
  __m256d q = _mm256_fmadd_pd(q0, xx, q1);
  q = _mm256_fmadd_pd(q, xx, q2);
  q = _mm256_fmadd_pd(q, xx, q3);
  __m256d e = _mm256_div_pd(p, _mm256_sub_pd(q, p));
  e = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), one);

  // 2^n assembled in the exponent field; n is integral in [-1022, 1022]
  __m128i n32 = _mm256_cvtpd_epi32(n);
  __m256i n64 = _mm256_cvtepi32_epi64(n32);
  n64 = _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
  return _mm256_mul_pd(e, _mm256_castsi256_pd(n64));
}

void exp_avx2(const double* x, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, exp4(_mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) y[i] = std::exp(x[i]);
}

void sigmoid_avx2(const double* x, double* y, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d vx = _mm256_loadu_pd(x + i);
    const __m256d neg_abs = _mm256_min_pd(vx, _mm256_sub_pd(zero, vx));
    const __m256d e = exp4(neg_abs);
    const __m256d denom = _mm256_add_pd(one, e);
    const __m256d pos = _mm256_div_pd(one, denom);
    const __m256d neg = _mm256_div_pd(e, denom);
    const __m256d mask = _mm256_cmp_pd(vx, zero, _CMP_LT_OQ);
    _mm256_storeu_pd(y + i, _mm256_blendv_pd(pos, neg, mask));
  }
  for (; i < n; ++i) y[i] = sigmoid1(x[i]);
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t = {
      dot_avx2,    sum_avx2,    sumsq_diff_avx2,
      axpy_avx2,   mul_add_avx2, affine_avx2,
      horner_avx2, exp_avx2,     sigmoid_avx2,
  };
  return t;
}

bool avx2_cpu_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

}  // namespace moebench::kernels::detail

#endif  // MOEBENCH_HAVE_AVX2
