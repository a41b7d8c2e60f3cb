#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops shared by the whole library. Each kernel has a
// scalar reference implementation; on x86-64 an AVX2+FMA variant is compiled
// in and selected at runtime when the CPU supports it. The active backend can
// be forced with set_backend() or the MOEBENCH_KERNELS environment variable
// ("scalar", "avx2"). Scalar and SIMD variants are equivalence-tested against
// each other in tests/test_kernels.cpp.
//
// All kernels expect finite inputs unless noted; exp_apply/sigmoid_apply do
// not handle NaN.
namespace moebench::kernels {

enum class Backend { Scalar, Avx2 };

Backend active_backend();
bool backend_available(Backend b);
// Switches the active backend. Returns false (no change) if unavailable.
bool set_backend(Backend b);
std::string_view backend_name(Backend b);

// sum_i a[i]*b[i]
double dot(const double* a, const double* b, std::size_t n);
// sum_i x[i]
double sum(const double* x, std::size_t n);
// sum_i (a[i]-b[i])^2
double sumsq_diff(const double* a, const double* b, std::size_t n);
// y[i] += alpha*x[i]
void axpy(double alpha, const double* x, double* y, std::size_t n);
// acc[i] += a[i]*b[i]
void mul_add(const double* a, const double* b, double* acc, std::size_t n);
// y[i] = scale*x[i] + shift
void affine(const double* x, double scale, double shift, double* y,
            std::size_t n);
// y[i] = c[0]*x[i]^(nc-1) + ... + c[nc-1], coefficients highest degree first
void horner(const double* coeffs, std::size_t ncoeffs, const double* x,
            double* y, std::size_t n);
// y[i] = exp(x[i]); the AVX2 variant saturates outside [-708, 708]
void exp_apply(const double* x, double* y, std::size_t n);
// y[i] = 1/(1+exp(-x[i])), stable branch form
void sigmoid_apply(const double* x, double* y, std::size_t n);

}  // namespace moebench::kernels
