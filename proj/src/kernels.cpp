#include "moebench/kernels.hpp"

#include <cstdlib>
#include <string_view>

#include "kernels_detail.hpp"

namespace moebench::kernels {
namespace {

using detail::KernelTable;

const KernelTable* table_for(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return &detail::scalar_table();
    case Backend::Avx2:
#ifdef MOEBENCH_HAVE_AVX2
      return &detail::avx2_table();
#else
      return nullptr;
#endif
  }
  return nullptr;
}

Backend default_backend() {
  if (const char* env = std::getenv("MOEBENCH_KERNELS")) {
    const std::string_view v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2" && backend_available(Backend::Avx2)) return Backend::Avx2;
  }
  if (backend_available(Backend::Avx2)) return Backend::Avx2;
  return Backend::Scalar;
}

struct Dispatch {
  Backend backend;
  const KernelTable* table;
  Dispatch() : backend(default_backend()), table(table_for(backend)) {}
};

Dispatch& dispatch() {
  static Dispatch d;
  return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

bool backend_available(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
#ifdef MOEBENCH_HAVE_AVX2
      return detail::avx2_cpu_supported();
#else
      return false;
#endif
  }
  return false;
}

bool set_backend(Backend b) {
  if (!backend_available(b)) return false;
  dispatch().backend = b;
  dispatch().table = table_for(b);
  return true;
}

std::string_view backend_name(Backend b) {
  switch (b) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
  }
  return "unknown";
}

double dot(const double* a, const double* b, std::size_t n) {
  return dispatch().table->dot(a, b, n);
}

double sum(const double* x, std::size_t n) {
  return dispatch().table->sum(x, n);
}

double sumsq_diff(const double* a, const double* b, std::size_t n) {
  return dispatch().table->sumsq_diff(a, b, n);
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
  dispatch().table->axpy(alpha, x, y, n);
}

void mul_add(const double* a, const double* b, double* acc, std::size_t n) {
  dispatch().table->mul_add(a, b, acc, n);
}

void affine(const double* x, double scale, double shift, double* y,
            std::size_t n) {
  dispatch().table->affine(x, scale, shift, y, n);
}

void horner(const double* coeffs, std::size_t ncoeffs, const double* x,
            double* y, std::size_t n) {
  dispatch().table->horner(coeffs, ncoeffs, x, y, n);
}

void exp_apply(const double* x, double* y, std::size_t n) {
  dispatch().table->exp_apply(x, y, n);
}

void sigmoid_apply(const double* x, double* y, std::size_t n) {
  dispatch().table->sigmoid_apply(x, y, n);
}

}  // namespace moebench::kernels
