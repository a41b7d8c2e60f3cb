#pragma once

#include <cstdint>
#include <vector>

#include "moebench/models.hpp"

// Bayesian model averaging backends. Conjugate Bayesian linear regression is
// exact; the logistic-regression posteriors are approximated either by
// stochastic-gradient Hamiltonian Monte Carlo samples or by a mean-field
// variational fit, and predictions average the per-sample probabilities.
// Both samplers place a standard normal N(0, I) prior on the weights.
namespace moebench {

struct GaussianPosterior {
  Vector mu;
  Matrix sigma;      // covariance, symmetric positive definite
  double noise_std;  // known likelihood noise std
};

enum class SamplerKind { Sghmc, Vi };

struct PosteriorSamples {
  std::vector<Vector> thetas;  // nonempty, uniform dimension
  SamplerKind provenance = SamplerKind::Sghmc;
  std::uint64_t seed = 0;
};

struct SghmcConfig {
  double friction = 0.9;         // per-step velocity damping
  double noise_estimate = 1e-4;  // subtracted from the injected noise scale
  double lr0 = 0.01;
  double decay = 0.05;  // per-epoch exponential decay of the step size
  std::size_t burn_in = 84;  // epochs without injected noise
  std::size_t n_samples = 16;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  double temperature = 1.0;
  // off: the update is plain SGD with momentum (used by the reduction test)
  bool inject_noise = true;
};

struct ViConfig {
  double temperature = 0.1;  // tempering of the entropy term
  std::size_t epochs = 100;
  double lr = 0.01;  // fixed, Adam
  std::size_t batch_size = 64;
  std::size_t mc_samples = 1;  // reparameterized draws per step
  std::size_t inference_samples = 16;
  std::uint64_t seed = 0;
};

struct PredictiveNormal {
  double mean;
  double var;
};

// Posterior precision = prior precision + X^T X / sigma^2; covariance is its
// inverse; mu = Sigma (prior_precision mu0 + X^T y / sigma^2). An empty
// dataset returns the prior unchanged.
GaussianPosterior blr_posterior(const GaussianPosterior& prior,
                                const Dataset& ds);

// N(x^T mu, x^T Sigma x + sigma^2)
PredictiveNormal blr_predictive(const GaussianPosterior& post,
                                const Vector& x);

// Mean per-point negative log predictive density over the dataset.
double blr_nll(const GaussianPosterior& post, const Dataset& ds);

// Posterior sampling for the GLM likelihood given by model (link and, for
// identity link, the known noise std). Position update theta += v, then
// velocity update v += -lr*grad_U - friction*v + noise, with the minibatch
// energy gradient scaled up to full-data size. Burn-in epochs run without
// injected noise; afterwards one sample is collected at the end of each
// epoch until n_samples are gathered.
PosteriorSamples sghmc_sample(const GlmParams& model, const Dataset& ds,
                              const SghmcConfig& cfg);

struct ViResult {
  Vector mu;     // variational mean
  Vector sigma;  // variational std, positive
};

// Mean-field Gaussian fit maximizing E_q[log p(D, theta) - T log q(theta)]
// by reparameterized stochastic gradients; sigma is kept positive through a
// softplus parameterization. Initialization: mu = 0, sigma = 0.1.
ViResult vi_fit(const GlmParams& model, const Dataset& ds,
                const ViConfig& cfg);

// n fixed draws theta = mu + sigma * eps for prediction-time averaging.
PosteriorSamples vi_draw_samples(const ViResult& fit, std::size_t n,
                                 std::uint64_t seed);

// Mean over samples of sigmoid(x^T theta), in (0, 1).
double bma_predict(const PosteriorSamples& samples, const Vector& x);
Vector bma_predict_many(const PosteriorSamples& samples, const Matrix& x);

}  // namespace moebench
