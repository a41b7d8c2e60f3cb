#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "moebench/datagen.hpp"
#include "moebench/linalg.hpp"

// Linear and logistic regression experts, their losses/gradients, and the
// evaluation metrics. Regression experts treat the observation noise std as a
// known constant (the generator's 0.1); only the weights are learned.
namespace moebench {

enum class LinkKind { Identity, Logistic };

struct GlmParams {
  Vector theta;  // includes the intercept slot matching the identity feature
  LinkKind link = LinkKind::Identity;
  double noise_std = 0.1;  // regression only
};

// One result-table row. Fields that do not apply to a model/task combination
// stay disengaged and serialize as empty CSV fields.
struct MetricsRecord {
  std::string model;
  int degree = 0;
  std::optional<double> mse;
  std::optional<double> nll;  // mean per-point negative log predictive
  std::optional<double> accuracy;
  std::optional<double> risk;
  std::optional<double> seconds;
  std::uint64_t seed = 0;
};

// x^T theta
double linreg_mean(const GlmParams& p, const Vector& x);
Vector linreg_mean_many(const GlmParams& p, const Matrix& x);

// -sum_i log N(y_i | x_i^T theta, sigma^2), the sum form
double linreg_nll(const GlmParams& p, const Dataset& ds);
// (1 / 2 sigma^2) sum_i (y_i - x_i^T theta)^2; equals linreg_nll minus the
// theta-independent constant n*log(sigma*sqrt(2 pi))
double linreg_sqerr_part(const GlmParams& p, const Dataset& ds);
// d linreg_nll / d theta = (1/sigma^2) X^T (X theta - y)
Vector linreg_nll_grad(const GlmParams& p, const Dataset& ds);

// sigmoid(x^T theta)
double logreg_prob(const GlmParams& p, const Vector& x);
Vector logreg_prob_many(const GlmParams& p, const Matrix& x);

// mean of -[y log p + (1-y) log(1-p)], probabilities clamped to
// [1e-12, 1-1e-12]
double cross_entropy(const Vector& probs, const Vector& labels);
double logreg_ce(const GlmParams& p, const Dataset& ds);
// d logreg_ce / d theta = (1/n) X^T (sigmoid(X theta) - y)
Vector logreg_ce_grad(const GlmParams& p, const Dataset& ds);

double mse(const Vector& preds, const Vector& targets);
// fraction with (p > 0.5) matching the label; p == 0.5 predicts 1
double accuracy(const Vector& probs, const Vector& labels);

// Total log-likelihood of the dataset rows under p (Gaussian with known
// noise_std for identity link, Bernoulli for logistic), and its gradient in
// theta. The *_idx forms restrict to the given row indices.
double glm_loglik(const GlmParams& p, const Dataset& ds);
Vector glm_loglik_grad(const GlmParams& p, const Dataset& ds);
double glm_loglik_idx(const GlmParams& p, const Dataset& ds,
                      const std::size_t* idx, std::size_t count);
Vector glm_loglik_grad_idx(const GlmParams& p, const Dataset& ds,
                           const std::size_t* idx, std::size_t count);

struct MeanWithSE {
  double mean = 0.0;
  double std_err = 0.0;
};

// Sample mean with standard error (sample std / sqrt(n)).
MeanWithSE mean_with_se(const Vector& values);

// Predictor maps one feature row (identity column included) to the predictive
// mean (regression) or positive-class probability (classification).
using Predictor = std::function<double(const double*)>;

// Monte-Carlo estimate of the expected loss of the predictor under the true
// generator, with a fresh sample stream: squared error of the predictive mean
// for regression, per-point cross-entropy for classification.
MeanWithSE frequentist_risk(const Predictor& predictor,
                            const GeneratorSpec& spec, std::size_t n_mc,
                            std::uint64_t seed);

// The generator's own conditional mean (regression) or indicator probability
// (classification), as a baseline no trained model can beat.
Predictor bayes_optimal_predictor(const GeneratorSpec& spec);

}  // namespace moebench
