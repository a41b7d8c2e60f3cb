#include "moebench/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "moebench/kernels.hpp"

namespace moebench {

Matrix identity(std::size_t n) {
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0;
  return a;
}

Vector matvec(const Matrix& a, const Vector& x) {
  if (x.size() != a.cols) throw std::invalid_argument("matvec: size mismatch");
  Vector y(a.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    y[i] = kernels::dot(a.row(i), x.data(), a.cols);
  }
  return y;
}

Vector matvec_t(const Matrix& a, const Vector& x) {
  if (x.size() != a.rows) {
    throw std::invalid_argument("matvec_t: size mismatch");
  }
  Vector y(a.cols, 0.0);
  for (std::size_t i = 0; i < a.rows; ++i) {
    kernels::axpy(x[i], a.row(i), y.data(), a.cols);
  }
  return y;
}

Matrix gram(const Matrix& x) {
  Matrix g(x.cols, x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) add_outer(g, x.row(i), 1.0);
  return g;
}

void add_outer(Matrix& a, const double* x, double alpha) {
  if (a.rows != a.cols) throw std::invalid_argument("add_outer: not square");
  for (std::size_t i = 0; i < a.rows; ++i) {
    kernels::axpy(alpha * x[i], x, a.row(i), a.cols);
  }
}

double quad_form(const Matrix& a, const Vector& x) {
  if (a.rows != a.cols || x.size() != a.cols) {
    throw std::invalid_argument("quad_form: size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows; ++i) {
    acc += x[i] * kernels::dot(a.row(i), x.data(), a.cols);
  }
  return acc;
}

Matrix cholesky(const Matrix& a) {
  if (a.rows != a.cols) throw std::invalid_argument("cholesky: not square");
  const std::size_t n = a.rows;
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j) - kernels::dot(l.row(j), l.row(j), j);
    if (!(d > 0.0)) {
      throw std::runtime_error("cholesky: matrix not positive definite");
    }
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      const double s = a(i, j) - kernels::dot(l.row(i), l.row(j), j);
      l(i, j) = s / l(j, j);
    }
  }
  return l;
}

Vector chol_solve(const Matrix& l, const Vector& b) {
  const std::size_t n = l.rows;
  if (b.size() != n) throw std::invalid_argument("chol_solve: size mismatch");
  Vector z(n);
  for (std::size_t i = 0; i < n; ++i) {
    z[i] = (b[i] - kernels::dot(l.row(i), z.data(), i)) / l(i, i);
  }
  for (std::size_t pass = 0; pass < n; ++pass) {
    const std::size_t i = n - 1 - pass;
    double s = z[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= l(j, i) * z[j];
    z[i] = s / l(i, i);
  }
  return z;
}

Vector solve_spd(const Matrix& a, const Vector& b) {
  return chol_solve(cholesky(a), b);
}

Matrix inv_spd(const Matrix& a) {
  const std::size_t n = a.rows;
  const Matrix l = cholesky(a);
  Matrix inv(n, n);
  Vector e(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    e[j] = 1.0;
    const Vector col = chol_solve(l, e);
    e[j] = 0.0;
    for (std::size_t i = 0; i < n; ++i) inv(i, j) = col[i];
  }
  return inv;
}

}  // namespace moebench
