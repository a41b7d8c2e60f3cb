#pragma once

#include <cstddef>
#include <vector>

// Dense row-major matrices over double. Everything here is sized for small
// parameter blocks (design dimension <= a few dozen); factorizations are
// unblocked.
namespace moebench {

using Vector = std::vector<double>;

struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major, rows*cols

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) {
    return data[i * cols + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }
  double* row(std::size_t i) { return data.data() + i * cols; }
  const double* row(std::size_t i) const { return data.data() + i * cols; }
};

Matrix identity(std::size_t n);

// A x
Vector matvec(const Matrix& a, const Vector& x);
// A^T x
Vector matvec_t(const Matrix& a, const Vector& x);
// X^T X
Matrix gram(const Matrix& x);
// A += alpha * x x^T for square A
void add_outer(Matrix& a, const double* x, double alpha);
// x^T A x for square A
double quad_form(const Matrix& a, const Vector& x);

// Lower-triangular L with L L^T = A. Throws std::runtime_error if A is not
// symmetric positive definite.
Matrix cholesky(const Matrix& a);
// Solves L L^T z = b given the factor from cholesky().
Vector chol_solve(const Matrix& l, const Vector& b);
// Solves A z = b for symmetric positive definite A.
Vector solve_spd(const Matrix& a, const Vector& b);
// A^{-1} for symmetric positive definite A.
Matrix inv_spd(const Matrix& a);

}  // namespace moebench
