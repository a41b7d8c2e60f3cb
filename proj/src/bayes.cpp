#include "moebench/bayes.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "moebench/kernels.hpp"
#include "moebench/moe.hpp"
#include "moebench/numerics.hpp"
#include "moebench/rng.hpp"

namespace moebench {

namespace {

// -grad log p(theta) for the standard normal prior is theta itself
Vector energy_grad(const GlmParams& p, const Dataset& ds,
                   const std::size_t* idx, std::size_t count,
                   double full_over_batch) {
  Vector g(p.theta);
  if (count > 0) {
    const Vector ll = glm_loglik_grad_idx(p, ds, idx, count);
    kernels::axpy(-full_over_batch, ll.data(), g.data(), g.size());
  }
  return g;
}

std::vector<std::size_t> iota_perm(std::size_t n) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  return perm;
}

}  // namespace

GaussianPosterior blr_posterior(const GaussianPosterior& prior,
                                const Dataset& ds) {
  if (prior.mu.size() != prior.sigma.rows ||
      prior.sigma.rows != prior.sigma.cols) {
    throw std::invalid_argument("blr_posterior: malformed prior");
  }
  if (ds.x.rows == 0) return prior;
  if (ds.x.cols != prior.mu.size()) {
    throw std::invalid_argument("blr_posterior: dimension mismatch");
  }
  if (!(prior.noise_std > 0.0)) {
    throw std::invalid_argument("blr_posterior: noise std must be positive");
  }
  const double inv_var = 1.0 / (prior.noise_std * prior.noise_std);

  Matrix lambda = inv_spd(prior.sigma);  // throws if the prior is not SPD
  Vector rhs = solve_spd(prior.sigma, prior.mu);  // prior precision * mu0
  const Matrix xtx = gram(ds.x);
  for (std::size_t i = 0; i < lambda.data.size(); ++i) {
    lambda.data[i] += inv_var * xtx.data[i];
  }
  const Vector xty = matvec_t(ds.x, ds.y);
  kernels::axpy(inv_var, xty.data(), rhs.data(), rhs.size());

  GaussianPosterior post;
  post.sigma = inv_spd(lambda);
  post.mu = solve_spd(lambda, rhs);
  post.noise_std = prior.noise_std;
  return post;
}

PredictiveNormal blr_predictive(const GaussianPosterior& post,
                                const Vector& x) {
  if (x.size() != post.mu.size()) {
    throw std::invalid_argument("blr_predictive: dimension mismatch");
  }
  const double mean = kernels::dot(post.mu.data(), x.data(), x.size());
  const double var =
      quad_form(post.sigma, x) + post.noise_std * post.noise_std;
  return {mean, var};
}

double blr_nll(const GaussianPosterior& post, const Dataset& ds) {
  if (ds.x.rows == 0) throw std::invalid_argument("blr_nll: empty dataset");
  Vector row(ds.x.cols);
  double total = 0.0;
  for (std::size_t i = 0; i < ds.x.rows; ++i) {
    std::copy(ds.x.row(i), ds.x.row(i) + ds.x.cols, row.begin());
    const PredictiveNormal pred = blr_predictive(post, row);
    total -= normal_logpdf(ds.y[i], pred.mean, std::sqrt(pred.var));
  }
  return total / static_cast<double>(ds.x.rows);
}

PosteriorSamples sghmc_sample(const GlmParams& model, const Dataset& ds,
                              const SghmcConfig& cfg) {
  if (!(cfg.noise_estimate > 0.0) || !(cfg.noise_estimate < cfg.friction)) {
    throw std::invalid_argument(
        "sghmc: noise estimate must lie in (0, friction)");
  }
  if (!(cfg.lr0 > 0.0) || cfg.n_samples < 1 || cfg.batch_size < 1 ||
      !(cfg.temperature > 0.0)) {
    throw std::invalid_argument("sghmc: invalid config");
  }
  const std::size_t d = model.theta.size();
  const std::size_t n = ds.x.rows;
  if (n > 0 && ds.x.cols != d) {
    throw std::invalid_argument("sghmc: dimension mismatch");
  }

  Rng rng(cfg.seed);
  GlmParams cur = model;
  cur.theta.assign(d, 0.0);
  Vector v(d, 0.0);

  std::vector<std::size_t> perm = iota_perm(n);
  const std::size_t total_epochs = cfg.burn_in + cfg.n_samples;

  PosteriorSamples out;
  out.provenance = SamplerKind::Sghmc;
  out.seed = cfg.seed;
  out.thetas.reserve(cfg.n_samples);

  for (std::size_t epoch = 0; epoch < total_epochs; ++epoch) {
    const bool noisy = cfg.inject_noise && epoch >= cfg.burn_in;
    const double alpha =
        cfg.lr0 * std::exp(-cfg.decay * static_cast<double>(epoch));
    const double noise_scale = std::sqrt(
        2.0 * (cfg.friction - cfg.noise_estimate) * alpha * cfg.temperature);
    rng.shuffle(perm);
    const std::size_t steps =
        n == 0 ? 1 : (n + cfg.batch_size - 1) / cfg.batch_size;
    for (std::size_t b = 0; b < steps; ++b) {
      const std::size_t start = b * cfg.batch_size;
      const std::size_t count = n == 0 ? 0 : std::min(cfg.batch_size, n - start);
      const double scale =
          count == 0 ? 0.0
                     : static_cast<double>(n) / static_cast<double>(count);
      // position first, then velocity at the new position
      kernels::axpy(1.0, v.data(), cur.theta.data(), d);
      const Vector g =
          energy_grad(cur, ds, perm.data() + start, count, scale);
      for (std::size_t i = 0; i < d; ++i) {
        v[i] -= alpha * g[i] + cfg.friction * v[i];
        if (noisy) v[i] += noise_scale * rng.normal();
      }
    }
    if (epoch >= cfg.burn_in) out.thetas.push_back(cur.theta);
  }
  return out;
}

ViResult vi_fit(const GlmParams& model, const Dataset& ds,
                const ViConfig& cfg) {
  if (!(cfg.temperature > 0.0) || cfg.epochs < 1 || !(cfg.lr > 0.0) ||
      cfg.batch_size < 1 || cfg.mc_samples < 1) {
    throw std::invalid_argument("vi_fit: invalid config");
  }
  const std::size_t d = model.theta.size();
  const std::size_t n = ds.x.rows;
  if (n > 0 && ds.x.cols != d) {
    throw std::invalid_argument("vi_fit: dimension mismatch");
  }

  Rng rng(cfg.seed);
  Vector mu(d, 0.0);
  // softplus(rho) = 0.1 at initialization
  Vector rho(d, std::log(std::expm1(0.1)));

  AdamState st_mu, st_rho;
  std::vector<std::size_t> perm = iota_perm(n);
  GlmParams cur = model;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(perm);
    const std::size_t steps =
        n == 0 ? 1 : (n + cfg.batch_size - 1) / cfg.batch_size;
    for (std::size_t b = 0; b < steps; ++b) {
      const std::size_t start = b * cfg.batch_size;
      const std::size_t count = n == 0 ? 0 : std::min(cfg.batch_size, n - start);
      const double scale =
          count == 0 ? 0.0
                     : static_cast<double>(n) / static_cast<double>(count);
      Vector g_mu(d, 0.0), g_rho(d, 0.0);
      for (std::size_t s = 0; s < cfg.mc_samples; ++s) {
        Vector sig(d), eps(d);
        for (std::size_t i = 0; i < d; ++i) {
          sig[i] = softplus(rho[i]);
          eps[i] = rng.normal();
          cur.theta[i] = mu[i] + sig[i] * eps[i];
        }
        // grad of log p(D, theta) at the sampled theta
        Vector joint = energy_grad(cur, ds, perm.data() + start, count, scale);
        for (double& x : joint) x = -x;
        for (std::size_t i = 0; i < d; ++i) {
          g_mu[i] += -joint[i];
          const double d_sigma =
              -(joint[i] * eps[i] + cfg.temperature / sig[i]);
          g_rho[i] += d_sigma * sigmoid(rho[i]);
        }
      }
      const double inv_mc = 1.0 / static_cast<double>(cfg.mc_samples);
      for (std::size_t i = 0; i < d; ++i) {
        g_mu[i] *= inv_mc;
        g_rho[i] *= inv_mc;
      }
      adam_step(st_mu, mu.data(), g_mu.data(), d, cfg.lr);
      adam_step(st_rho, rho.data(), g_rho.data(), d, cfg.lr);
    }
  }

  ViResult out;
  out.mu = std::move(mu);
  out.sigma.resize(d);
  for (std::size_t i = 0; i < d; ++i) out.sigma[i] = softplus(rho[i]);
  return out;
}

PosteriorSamples vi_draw_samples(const ViResult& fit, std::size_t n,
                                 std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("vi_draw_samples: n must be >= 1");
  Rng rng(seed);
  PosteriorSamples out;
  out.provenance = SamplerKind::Vi;
  out.seed = seed;
  out.thetas.assign(n, Vector(fit.mu.size()));
  for (Vector& theta : out.thetas) {
    for (std::size_t i = 0; i < theta.size(); ++i) {
      theta[i] = fit.mu[i] + fit.sigma[i] * rng.normal();
    }
  }
  return out;
}

double bma_predict(const PosteriorSamples& samples, const Vector& x) {
  if (samples.thetas.empty()) {
    throw std::invalid_argument("bma_predict: no samples");
  }
  double total = 0.0;
  for (const Vector& theta : samples.thetas) {
    if (theta.size() != x.size()) {
      throw std::invalid_argument("bma_predict: dimension mismatch");
    }
    total += sigmoid(kernels::dot(theta.data(), x.data(), x.size()));
  }
  return total / static_cast<double>(samples.thetas.size());
}

Vector bma_predict_many(const PosteriorSamples& samples, const Matrix& x) {
  Vector out(x.rows);
  Vector row(x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::copy(x.row(i), x.row(i) + x.cols, row.begin());
    out[i] = bma_predict(samples, row);
  }
  return out;
}

}  // namespace moebench
