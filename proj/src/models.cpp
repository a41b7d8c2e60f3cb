#include "moebench/models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "moebench/kernels.hpp"
#include "moebench/numerics.hpp"

namespace moebench {

namespace {

constexpr double kProbClamp = 1e-12;

double clamp_prob(double p) {
  if (p < kProbClamp) return kProbClamp;
  if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
  return p;
}

double point_ce(double prob, double label) {
  const double p = clamp_prob(prob);
  return -(label * std::log(p) + (1.0 - label) * std::log1p(-p));
}

void check_dims(const GlmParams& p, std::size_t cols) {
  if (p.theta.size() != cols) {
    throw std::invalid_argument("glm: parameter/feature dimension mismatch");
  }
}

}  // namespace

double linreg_mean(const GlmParams& p, const Vector& x) {
  check_dims(p, x.size());
  return kernels::dot(p.theta.data(), x.data(), x.size());
}

Vector linreg_mean_many(const GlmParams& p, const Matrix& x) {
  check_dims(p, x.cols);
  return matvec(x, p.theta);
}

double linreg_nll(const GlmParams& p, const Dataset& ds) {
  if (!(p.noise_std > 0.0)) {
    throw std::invalid_argument("linreg_nll: noise std must be positive");
  }
  const double n = static_cast<double>(ds.x.rows);
  return linreg_sqerr_part(p, ds) +
         n * std::log(p.noise_std * std::sqrt(2.0 * std::numbers::pi));
}

double linreg_sqerr_part(const GlmParams& p, const Dataset& ds) {
  const Vector mu = linreg_mean_many(p, ds.x);
  const double ss = kernels::sumsq_diff(mu.data(), ds.y.data(), mu.size());
  return ss / (2.0 * p.noise_std * p.noise_std);
}

Vector linreg_nll_grad(const GlmParams& p, const Dataset& ds) {
  Vector resid = linreg_mean_many(p, ds.x);
  kernels::axpy(-1.0, ds.y.data(), resid.data(), resid.size());
  Vector g = matvec_t(ds.x, resid);
  const double inv_var = 1.0 / (p.noise_std * p.noise_std);
  for (double& v : g) v *= inv_var;
  return g;
}

double logreg_prob(const GlmParams& p, const Vector& x) {
  check_dims(p, x.size());
  return sigmoid(kernels::dot(p.theta.data(), x.data(), x.size()));
}

Vector logreg_prob_many(const GlmParams& p, const Matrix& x) {
  check_dims(p, x.cols);
  Vector z = matvec(x, p.theta);
  Vector probs(z.size());
  kernels::sigmoid_apply(z.data(), probs.data(), z.size());
  return probs;
}

double cross_entropy(const Vector& probs, const Vector& labels) {
  if (probs.size() != labels.size()) {
    throw std::invalid_argument("cross_entropy: length mismatch");
  }
  if (probs.empty()) throw std::invalid_argument("cross_entropy: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    total += point_ce(probs[i], labels[i]);
  }
  return total / static_cast<double>(probs.size());
}

double logreg_ce(const GlmParams& p, const Dataset& ds) {
  return cross_entropy(logreg_prob_many(p, ds.x), ds.y);
}

Vector logreg_ce_grad(const GlmParams& p, const Dataset& ds) {
  Vector diff = logreg_prob_many(p, ds.x);
  kernels::axpy(-1.0, ds.y.data(), diff.data(), diff.size());
  Vector g = matvec_t(ds.x, diff);
  const double inv_n = 1.0 / static_cast<double>(ds.x.rows);
  for (double& v : g) v *= inv_n;
  return g;
}

double mse(const Vector& preds, const Vector& targets) {
  if (preds.size() != targets.size()) {
    throw std::invalid_argument("mse: length mismatch");
  }
  if (preds.empty()) throw std::invalid_argument("mse: empty input");
  return kernels::sumsq_diff(preds.data(), targets.data(), preds.size()) /
         static_cast<double>(preds.size());
}

double accuracy(const Vector& probs, const Vector& labels) {
  if (probs.size() != labels.size()) {
    throw std::invalid_argument("accuracy: length mismatch");
  }
  if (probs.empty()) throw std::invalid_argument("accuracy: empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double predicted = probs[i] >= 0.5 ? 1.0 : 0.0;
    if (predicted == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(probs.size());
}

double glm_loglik(const GlmParams& p, const Dataset& ds) {
  if (p.link == LinkKind::Identity) return -linreg_nll(p, ds);
  const Vector probs = logreg_prob_many(p, ds.x);
  double ll = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    ll -= point_ce(probs[i], ds.y[i]);
  }
  return ll;
}

Vector glm_loglik_grad(const GlmParams& p, const Dataset& ds) {
  if (p.link == LinkKind::Identity) {
    Vector g = linreg_nll_grad(p, ds);
    for (double& v : g) v = -v;
    return g;
  }
  // d/d theta sum_i log Ber(y_i | sigmoid(x_i^T theta)) = X^T (y - probs)
  Vector diff = logreg_prob_many(p, ds.x);
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = ds.y[i] - diff[i];
  return matvec_t(ds.x, diff);
}

double glm_loglik_idx(const GlmParams& p, const Dataset& ds,
                      const std::size_t* idx, std::size_t count) {
  check_dims(p, ds.x.cols);
  double ll = 0.0;
  if (p.link == LinkKind::Identity) {
    const double var = p.noise_std * p.noise_std;
    const double log_norm =
        std::log(p.noise_std * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t k = 0; k < count; ++k) {
      const double* row = ds.x.row(idx[k]);
      const double r =
          ds.y[idx[k]] - kernels::dot(p.theta.data(), row, ds.x.cols);
      ll += -0.5 * r * r / var - log_norm;
    }
    return ll;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const double* row = ds.x.row(idx[k]);
    const double prob =
        sigmoid(kernels::dot(p.theta.data(), row, ds.x.cols));
    ll -= point_ce(prob, ds.y[idx[k]]);
  }
  return ll;
}

Vector glm_loglik_grad_idx(const GlmParams& p, const Dataset& ds,
                           const std::size_t* idx, std::size_t count) {
  check_dims(p, ds.x.cols);
  Vector g(ds.x.cols, 0.0);
  if (p.link == LinkKind::Identity) {
    const double inv_var = 1.0 / (p.noise_std * p.noise_std);
    for (std::size_t k = 0; k < count; ++k) {
      const double* row = ds.x.row(idx[k]);
      const double r =
          ds.y[idx[k]] - kernels::dot(p.theta.data(), row, ds.x.cols);
      kernels::axpy(inv_var * r, row, g.data(), ds.x.cols);
    }
    return g;
  }
  for (std::size_t k = 0; k < count; ++k) {
    const double* row = ds.x.row(idx[k]);
    const double prob =
        sigmoid(kernels::dot(p.theta.data(), row, ds.x.cols));
    kernels::axpy(ds.y[idx[k]] - prob, row, g.data(), ds.x.cols);
  }
  return g;
}

MeanWithSE mean_with_se(const Vector& values) {
  if (values.empty()) throw std::invalid_argument("mean_with_se: empty input");
  const double n = static_cast<double>(values.size());
  const double mean = kernels::sum(values.data(), values.size()) / n;
  if (values.size() == 1) return {mean, 0.0};
  double sq = 0.0;
  for (const double v : values) sq += (v - mean) * (v - mean);
  return {mean, std::sqrt(sq / (n - 1.0) / n)};
}

MeanWithSE frequentist_risk(const Predictor& predictor,
                            const GeneratorSpec& spec, std::size_t n_mc,
                            std::uint64_t seed) {
  if (n_mc == 0) throw std::invalid_argument("frequentist_risk: n_mc == 0");
  Rng rng(seed);
  const auto [x, y] = sample_from_spec(spec, n_mc, rng);
  Vector losses(n_mc);
  for (std::size_t i = 0; i < n_mc; ++i) {
    const double pred = predictor(x.row(i));
    if (spec.kind == TaskKind::Regression) {
      const double d = pred - y[i];
      losses[i] = d * d;
    } else {
      losses[i] = point_ce(pred, y[i]);
    }
  }
  return mean_with_se(losses);
}

Predictor bayes_optimal_predictor(const GeneratorSpec& spec) {
  if (spec.kind == TaskKind::Regression) {
    return [spec](const double* row) {
      const ColumnStats& fs = spec.feature_stats[0];
      const double raw = row[1] * fs.std + fs.mean;
      const double t = poly_eval(spec.coeffs, raw);
      return (t - spec.target_stats.mean) / spec.target_stats.std;
    };
  }
  return [spec](const double* row) {
    const double x1 = row[1] * spec.feature_stats[0].std +
                      spec.feature_stats[0].mean;
    const double x2 = row[2] * spec.feature_stats[1].std +
                      spec.feature_stats[1].mean;
    return x2 > poly_eval(spec.coeffs, x1) ? 1.0 : 0.0;
  };
}

}  // namespace moebench
