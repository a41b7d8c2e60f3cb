#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "moebench/linalg.hpp"
#include "moebench/rng.hpp"

// Synthetic dataset families. Regression: targets from a fixed univariate
// polynomial plus Gaussian noise. Classification: two features (x1, noisy
// x2 = p(x1) + noise) labeled by thresholding x2 against the polynomial, so
// the decision boundary in feature space is a degree-m curve. Both families
// standardize columns by train-split statistics and prepend an identity
// feature.
namespace moebench {

enum class TaskKind { Regression, Classification };

struct ColumnStats {
  double mean = 0.0;
  double std = 1.0;
};

struct GeneratorSpec {
  TaskKind kind = TaskKind::Regression;
  int degree = 1;
  // highest-degree coefficient first, degree+1 entries
  Vector coeffs;
  // raw feature sampling interval
  double x_lo = 0.0;
  double x_hi = 0.0;
  // regression: noise std on standardized targets; classification: noise std
  // on raw x2, equal to the std of the noiseless x2 train column
  double noise_std = 0.0;
  // per raw (non-identity) feature column, from the train split
  std::vector<ColumnStats> feature_stats;
  // regression only, from the noiseless train targets
  ColumnStats target_stats;
  std::uint64_t seed = 0;
};

struct Dataset {
  Matrix x;  // n rows, column 0 identically 1
  Vector y;  // reals for regression, {0,1} for classification
  GeneratorSpec spec;
};

struct DataBundle {
  Dataset train;
  Dataset test;
  GeneratorSpec spec;
};

// Mean and population (1/n) standard deviation. Throws on an empty or
// zero-variance ("degenerate") column.
ColumnStats column_stats(const Vector& v);
Vector standardize(const Vector& v, const ColumnStats& s);

// Horner evaluation, highest-degree coefficient first; coeffs must be
// nonempty.
double poly_eval(const Vector& coeffs, double x);
Vector poly_eval_many(const Vector& coeffs, const Vector& xs);

// degree 1..5: x ~ U[-2, 1], target polynomial with the leading degree+1
// coefficients of [2, 3, -1, -1, 1, 1]; features and noiseless targets are
// standardized by train statistics, then N(0, 0.1^2) noise is added to the
// standardized targets.
DataBundle gen_regression(int degree, std::size_t n_train = 10000,
                          std::size_t n_test = 2000, std::uint64_t seed = 0);

// degree 1..8: x1 ~ U[-3, 3], coefficients ~ N(0, 10), noisy
// x2 = p(x1) + N(0, sigma^2) with sigma the std of the noiseless train x2;
// label = 1 iff noisy x2 > p(x1) in raw coordinates (ties give 0), decided
// before standardization.
DataBundle gen_classification(int degree, std::size_t n_train = 10000,
                              std::size_t n_test = 2000,
                              std::uint64_t seed = 0);

// Fresh draws from a fitted generator (standardized features with identity
// column, noisy targets/labels), for Monte-Carlo risk estimation.
std::pair<Matrix, Vector> sample_from_spec(const GeneratorSpec& spec,
                                           std::size_t n, Rng& rng);

// C(2+m, 2): capacity needed to separate the degree-m family.
long correlated_vc_dimension(int degree);

}  // namespace moebench
