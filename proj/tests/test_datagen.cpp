#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "moebench/datagen.hpp"
#include "moebench/rng.hpp"

using namespace moebench;

namespace {

// population moments of one feature column
void column_moments(const Matrix& x, std::size_t col, double& mean,
                    double& std_dev) {
  double s = 0;
  for (std::size_t i = 0; i < x.rows; ++i) s += x(i, col);
  mean = s / static_cast<double>(x.rows);
  double v = 0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    double d = x(i, col) - mean;
    v += d * d;
  }
  std_dev = std::sqrt(v / static_cast<double>(x.rows));
}

}  // namespace

TEST_CASE("regression bundles are reproducible and roster independent") {
  DataBundle a = gen_regression(3, 200, 50, 42);
  DataBundle b = gen_regression(3, 200, 50, 42);
  CHECK(a.train.x.data == b.train.x.data);
  CHECK(a.train.y == b.train.y);
  CHECK(a.test.x.data == b.test.x.data);
  CHECK(a.test.y == b.test.y);
  DataBundle c = gen_regression(3, 200, 50, 43);
  CHECK(a.train.y != c.train.y);
}

TEST_CASE("regression design is intercept plus one standardized feature") {
  DataBundle b = gen_regression(2, 500, 100, 7);
  CHECK(b.train.x.cols == 2);
  CHECK(b.test.x.cols == 2);
  for (std::size_t i = 0; i < b.train.x.rows; ++i)
    CHECK(b.train.x(i, 0) == 1.0);
  for (std::size_t i = 0; i < b.test.x.rows; ++i) CHECK(b.test.x(i, 0) == 1.0);
  double mean, sd;
  column_moments(b.train.x, 1, mean, sd);
  CHECK(std::abs(mean) < 1e-12);
  CHECK(sd == doctest::Approx(1.0).epsilon(1e-12));
  // test columns reuse the train statistics, so they are near but not at 0/1
  column_moments(b.test.x, 1, mean, sd);
  CHECK(std::abs(mean) < 0.2);
  CHECK(std::abs(sd - 1.0) < 0.2);
}

TEST_CASE("regression coefficients are the leading slice of the shared pool") {
  DataBundle b = gen_regression(4, 50, 10, 1);
  CHECK(b.spec.coeffs == Vector{2, 3, -1, -1, 1});
  DataBundle l = gen_regression(1, 50, 10, 1);
  CHECK(l.spec.coeffs == Vector{2, 3});
}

TEST_CASE("regression targets center on the standardized curve") {
  // the distance from targets to the standardized noiseless curve is exactly
  // the injected noise: mean ~0, sd ~0.1
  DataBundle b = gen_regression(3, 4000, 10, 11);
  Vector raw(b.train.x.rows);
  // reconstruct raw x from the stored feature stats, evaluate the polynomial,
  // standardize with the stored target stats
  const auto& fs = b.spec.feature_stats[0];
  const auto& ts = b.spec.target_stats;
  double sum = 0, sumsq = 0;
  for (std::size_t i = 0; i < b.train.x.rows; ++i) {
    double x_raw = b.train.x(i, 1) * fs.std + fs.mean;
    double f = poly_eval(b.spec.coeffs, x_raw);
    double resid = b.train.y[i] - (f - ts.mean) / ts.std;
    sum += resid;
    sumsq += resid * resid;
  }
  double n = static_cast<double>(b.train.x.rows);
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::sqrt(sumsq / n) == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("regression rejects out-of-range degrees and empty splits") {
  CHECK_THROWS_AS((void)gen_regression(0, 10, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)gen_regression(6, 10, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS((void)gen_regression(2, 0, 10, 1), std::invalid_argument);
}

TEST_CASE("classification design has intercept and two standardized columns") {
  DataBundle b = gen_classification(4, 1000, 200, 5);
  CHECK(b.train.x.cols == 3);
  for (std::size_t i = 0; i < b.train.x.rows; ++i)
    CHECK(b.train.x(i, 0) == 1.0);
  for (std::size_t c = 1; c <= 2; ++c) {
    double mean, sd;
    column_moments(b.train.x, c, mean, sd);
    CHECK(std::abs(mean) < 1e-10);
    CHECK(sd == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("classification labels are the raw-coordinate comparison") {
  DataBundle b = gen_classification(3, 800, 100, 9);
  const auto& f1 = b.spec.feature_stats[0];
  const auto& f2 = b.spec.feature_stats[1];
  std::size_t ones = 0;
  for (std::size_t i = 0; i < b.train.x.rows; ++i) {
    double x1 = b.train.x(i, 1) * f1.std + f1.mean;
    double x2 = b.train.x(i, 2) * f2.std + f2.mean;
    double expect = x2 > poly_eval(b.spec.coeffs, x1) ? 1.0 : 0.0;
    CHECK(b.train.y[i] == expect);
    ones += b.train.y[i] == 1.0;
  }
  // labels are sign-of-noise, so the split is near even
  double frac = static_cast<double>(ones) / b.train.x.rows;
  CHECK(frac > 0.4);
  CHECK(frac < 0.6);
}

TEST_CASE("classification noise scale tracks the noiseless response spread") {
  DataBundle b = gen_classification(2, 2000, 100, 3);
  // noise_std was set to the population sd of the noiseless x2 values;
  // for sign-of-noise labels that makes raw x2 - p(x1) have sd noise_std
  const auto& f1 = b.spec.feature_stats[0];
  const auto& f2 = b.spec.feature_stats[1];
  double s = 0, ss = 0;
  for (std::size_t i = 0; i < b.train.x.rows; ++i) {
    double x1 = b.train.x(i, 1) * f1.std + f1.mean;
    double x2 = b.train.x(i, 2) * f2.std + f2.mean;
    double r = x2 - poly_eval(b.spec.coeffs, x1);
    s += r;
    ss += r * r;
  }
  double n = static_cast<double>(b.train.x.rows);
  double sd = std::sqrt(ss / n - (s / n) * (s / n));
  CHECK(sd == doctest::Approx(b.spec.noise_std).epsilon(0.06));
}

TEST_CASE("classification rejects out-of-range degrees") {
  CHECK_THROWS_AS((void)gen_classification(0, 10, 10, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)gen_classification(9, 10, 10, 1),
                  std::invalid_argument);
}

TEST_CASE("sample_from_spec reproduces held-out rows distributionally") {
  DataBundle b = gen_regression(2, 300, 50, 21);
  Rng rng(99);
  auto [fx, fy] = sample_from_spec(b.spec, 5000, rng);
  CHECK(fx.cols == b.train.x.cols);
  double mean, sd;
  column_moments(fx, 1, mean, sd);
  // fresh draws pass through the stored train standardization
  CHECK(std::abs(mean) < 0.05);
  CHECK(std::abs(sd - 1.0) < 0.05);
  double ymin = 1e300, ymax = -1e300;
  for (double y : fy) {
    ymin = std::min(ymin, y);
    ymax = std::max(ymax, y);
  }
  CHECK(std::isfinite(ymin));
  CHECK(std::isfinite(ymax));
}

TEST_CASE("sample_from_spec draws are deterministic given the generator") {
  DataBundle b = gen_classification(3, 300, 50, 21);
  Rng r1(5), r2(5);
  auto [ax, ay] = sample_from_spec(b.spec, 100, r1);
  auto [cx, cy] = sample_from_spec(b.spec, 100, r2);
  CHECK(ax.data == cx.data);
  CHECK(ay == cy);
}

TEST_CASE("correlated experts collapse the hypothesis count to C(m+2,2)") {
  CHECK(correlated_vc_dimension(1) == 3);
  CHECK(correlated_vc_dimension(2) == 6);
  CHECK(correlated_vc_dimension(3) == 10);
  CHECK(correlated_vc_dimension(10) == 66);
}
