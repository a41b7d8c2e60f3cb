#include "moebench/datagen.hpp"

#include <cmath>
#include <stdexcept>

#include "moebench/kernels.hpp"

namespace moebench {

namespace {

// leading degree+1 entries are the regression coefficients
const Vector kRegressionCoeffs = {2.0, 3.0, -1.0, -1.0, 1.0, 1.0};
constexpr double kRegressionNoiseStd = 0.1;
constexpr double kClassCoeffStd = 3.1622776601683795;  // sqrt(10)

Vector uniform_vec(Rng& rng, std::size_t n, double lo, double hi) {
  Vector v(n);
  for (double& x : v) x = rng.uniform(lo, hi);
  return v;
}

void check_finite(const Dataset& ds) {
  for (const double v : ds.x.data) {
    if (!std::isfinite(v)) throw std::runtime_error("dataset: non-finite feature");
  }
  for (const double v : ds.y) {
    if (!std::isfinite(v)) throw std::runtime_error("dataset: non-finite target");
  }
}

// columns: standardized raw features, identity prepended
Matrix assemble_features(const std::vector<Vector>& cols) {
  const std::size_t n = cols.front().size();
  Matrix x(n, cols.size() + 1);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 0; j < cols.size(); ++j) x(i, j + 1) = cols[j][i];
  }
  return x;
}

}  // namespace

ColumnStats column_stats(const Vector& v) {
  if (v.empty()) throw std::invalid_argument("column_stats: empty column");
  const double n = static_cast<double>(v.size());
  const double mean = kernels::sum(v.data(), v.size()) / n;
  double sq = 0.0;
  for (const double x : v) sq += (x - mean) * (x - mean);
  const double std_dev = std::sqrt(sq / n);
  if (!(std_dev > 0.0)) throw std::invalid_argument("degenerate column");
  return {mean, std_dev};
}

Vector standardize(const Vector& v, const ColumnStats& s) {
  if (!(s.std > 0.0)) throw std::invalid_argument("degenerate column");
  Vector out(v.size());
  kernels::affine(v.data(), 1.0 / s.std, -s.mean / s.std, out.data(),
                  v.size());
  return out;
}

double poly_eval(const Vector& coeffs, double x) {
  if (coeffs.empty()) throw std::invalid_argument("poly_eval: no coefficients");
  double r = coeffs[0];
  for (std::size_t i = 1; i < coeffs.size(); ++i) r = r * x + coeffs[i];
  return r;
}

Vector poly_eval_many(const Vector& coeffs, const Vector& xs) {
  if (coeffs.empty()) throw std::invalid_argument("poly_eval: no coefficients");
  Vector out(xs.size());
  kernels::horner(coeffs.data(), coeffs.size(), xs.data(), out.data(),
                  xs.size());
  return out;
}

DataBundle gen_regression(int degree, std::size_t n_train, std::size_t n_test,
                          std::uint64_t seed) {
  if (degree < 1 || degree > 5) {
    throw std::invalid_argument("gen_regression: degree must be in 1..5");
  }
  if (n_train == 0 || n_test == 0) {
    throw std::invalid_argument("gen_regression: empty split");
  }

  GeneratorSpec spec;
  spec.kind = TaskKind::Regression;
  spec.degree = degree;
  spec.coeffs.assign(kRegressionCoeffs.begin(),
                     kRegressionCoeffs.begin() + degree + 1);
  spec.x_lo = -2.0;
  spec.x_hi = 1.0;
  spec.noise_std = kRegressionNoiseStd;
  spec.seed = seed;

  Rng rng(seed);
  const Vector x_tr = uniform_vec(rng, n_train, spec.x_lo, spec.x_hi);
  const Vector x_te = uniform_vec(rng, n_test, spec.x_lo, spec.x_hi);
  const Vector noise_tr = sample_standard_normal(rng, n_train);
  const Vector noise_te = sample_standard_normal(rng, n_test);

  const Vector t_tr = poly_eval_many(spec.coeffs, x_tr);
  const Vector t_te = poly_eval_many(spec.coeffs, x_te);

  spec.feature_stats = {column_stats(x_tr)};
  spec.target_stats = column_stats(t_tr);

  DataBundle out;
  out.spec = spec;
  for (const bool is_train : {true, false}) {
    const Vector& x_raw = is_train ? x_tr : x_te;
    const Vector& t_raw = is_train ? t_tr : t_te;
    const Vector& noise = is_train ? noise_tr : noise_te;
    Dataset ds;
    ds.spec = spec;
    ds.x = assemble_features({standardize(x_raw, spec.feature_stats[0])});
    ds.y = standardize(t_raw, spec.target_stats);
    kernels::axpy(spec.noise_std, noise.data(), ds.y.data(), ds.y.size());
    check_finite(ds);
    (is_train ? out.train : out.test) = std::move(ds);
  }
  return out;
}

DataBundle gen_classification(int degree, std::size_t n_train,
                              std::size_t n_test, std::uint64_t seed) {
  if (degree < 1 || degree > 8) {
    throw std::invalid_argument("gen_classification: degree must be in 1..8");
  }
  if (n_train == 0 || n_test == 0) {
    throw std::invalid_argument("gen_classification: empty split");
  }

  GeneratorSpec spec;
  spec.kind = TaskKind::Classification;
  spec.degree = degree;
  spec.x_lo = -3.0;
  spec.x_hi = 3.0;
  spec.seed = seed;

  Rng rng(seed);
  spec.coeffs.resize(degree + 1);
  for (double& c : spec.coeffs) c = kClassCoeffStd * rng.normal();

  const Vector x1_tr = uniform_vec(rng, n_train, spec.x_lo, spec.x_hi);
  const Vector x1_te = uniform_vec(rng, n_test, spec.x_lo, spec.x_hi);
  const Vector eps_tr = sample_standard_normal(rng, n_train);
  const Vector eps_te = sample_standard_normal(rng, n_test);

  const Vector p_tr = poly_eval_many(spec.coeffs, x1_tr);
  const Vector p_te = poly_eval_many(spec.coeffs, x1_te);

  // noise std for x2 comes from the noiseless train column
  spec.noise_std = column_stats(p_tr).std;

  Vector x2_tr = p_tr;
  kernels::axpy(spec.noise_std, eps_tr.data(), x2_tr.data(), x2_tr.size());
  Vector x2_te = p_te;
  kernels::axpy(spec.noise_std, eps_te.data(), x2_te.data(), x2_te.size());

  spec.feature_stats = {column_stats(x1_tr), column_stats(x2_tr)};

  DataBundle out;
  out.spec = spec;
  for (const bool is_train : {true, false}) {
    const Vector& x1 = is_train ? x1_tr : x1_te;
    const Vector& x2 = is_train ? x2_tr : x2_te;
    const Vector& p = is_train ? p_tr : p_te;
    Dataset ds;
    ds.spec = spec;
    // labels from raw coordinates, before standardization; ties give 0
    ds.y.resize(x1.size());
    for (std::size_t i = 0; i < x1.size(); ++i) {
      ds.y[i] = x2[i] > p[i] ? 1.0 : 0.0;
    }
    ds.x = assemble_features({standardize(x1, spec.feature_stats[0]),
                              standardize(x2, spec.feature_stats[1])});
    check_finite(ds);
    (is_train ? out.train : out.test) = std::move(ds);
  }
  return out;
}

std::pair<Matrix, Vector> sample_from_spec(const GeneratorSpec& spec,
                                           std::size_t n, Rng& rng) {
  if (spec.feature_stats.empty()) {
    throw std::invalid_argument("sample_from_spec: spec has no train stats");
  }
  Vector y(n);
  if (spec.kind == TaskKind::Regression) {
    Matrix x(n, 2);
    const ColumnStats& fs = spec.feature_stats[0];
    const ColumnStats& ts = spec.target_stats;
    for (std::size_t i = 0; i < n; ++i) {
      const double raw = rng.uniform(spec.x_lo, spec.x_hi);
      const double t = poly_eval(spec.coeffs, raw);
      x(i, 0) = 1.0;
      x(i, 1) = (raw - fs.mean) / fs.std;
      y[i] = (t - ts.mean) / ts.std + spec.noise_std * rng.normal();
    }
    return {std::move(x), std::move(y)};
  }
  Matrix x(n, 3);
  const ColumnStats& f1 = spec.feature_stats[0];
  const ColumnStats& f2 = spec.feature_stats[1];
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = rng.uniform(spec.x_lo, spec.x_hi);
    const double p = poly_eval(spec.coeffs, x1);
    const double x2 = p + spec.noise_std * rng.normal();
    x(i, 0) = 1.0;
    x(i, 1) = (x1 - f1.mean) / f1.std;
    x(i, 2) = (x2 - f2.mean) / f2.std;
    y[i] = x2 > p ? 1.0 : 0.0;
  }
  return {std::move(x), std::move(y)};
}

long correlated_vc_dimension(int degree) {
  if (degree < 0) throw std::invalid_argument("degree must be nonnegative");
  const long m = degree;
  return (m + 2) * (m + 1) / 2;
}

}  // namespace moebench
