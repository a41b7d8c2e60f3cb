#include "moebench/numerics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace moebench {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

Vector softmax(const Vector& z) {
  if (z.empty()) throw std::invalid_argument("softmax: empty input");
  double zmax = kNegInf;
  for (const double v : z) {
    if (v > zmax) zmax = v;
  }
  if (!std::isfinite(zmax)) {
    throw std::invalid_argument("softmax: no finite logit");
  }
  Vector p(z.size());
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    p[i] = (z[i] == kNegInf) ? 0.0 : std::exp(z[i] - zmax);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double softplus_grad(double x) { return sigmoid(x); }

double logsumexp(const Vector& v) {
  if (v.empty()) throw std::invalid_argument("logsumexp: empty input");
  double vmax = kNegInf;
  for (const double x : v) {
    if (x > vmax) vmax = x;
  }
  if (vmax == kNegInf) return kNegInf;
  double total = 0.0;
  for (const double x : v) {
    if (x != kNegInf) total += std::exp(x - vmax);
  }
  return vmax + std::log(total);
}

double normal_logpdf(double x, double mean, double std_dev) {
  if (!(std_dev > 0.0)) {
    throw std::invalid_argument("normal_logpdf: std must be positive");
  }
  const double z = (x - mean) / std_dev;
  return -0.5 * z * z - std::log(std_dev) -
         0.5 * std::log(2.0 * std::numbers::pi);
}

Vector finite_diff_grad(const std::function<double(const Vector&)>& f,
                        const Vector& x, double h) {
  Vector g(x.size());
  Vector p = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = p[i];
    p[i] = xi + h;
    const double fp = f(p);
    p[i] = xi - h;
    const double fm = f(p);
    p[i] = xi;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace moebench
