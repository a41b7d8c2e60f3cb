#include "moebench/moe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "moebench/kernels.hpp"
#include "moebench/numerics.hpp"

namespace moebench {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kProbClamp = 1e-12;

std::vector<std::size_t> top_k_indices(const Vector& v, std::size_t k) {
  if (k < 1 || k > v.size()) {
    throw std::invalid_argument("keep_top_k: k out of range");
  }
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return a < b;  // ties to the lowest index
  });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

void check_model(const MoeModel& m, std::size_t d) {
  if (m.experts.empty()) throw std::invalid_argument("moe: no experts");
  if (m.gating.w_g.rows != m.experts.size() ||
      m.gating.w_noise.rows != m.experts.size() ||
      m.gating.w_g.cols != d || m.gating.w_noise.cols != d) {
    throw std::invalid_argument("moe: gating shape mismatch");
  }
  for (const GlmParams& e : m.experts) {
    if (e.theta.size() != d || e.link != m.experts.front().link) {
      throw std::invalid_argument("moe: experts not homogeneous");
    }
  }
}

// softmax over the selected logits only; everything else has probability 0
Vector selected_softmax(const Vector& h,
                        const std::vector<std::size_t>& sel) {
  double hmax = kNegInf;
  for (const std::size_t i : sel) hmax = std::max(hmax, h[i]);
  double total = 0.0;
  Vector p(sel.size());
  for (std::size_t j = 0; j < sel.size(); ++j) {
    p[j] = std::exp(h[sel[j]] - hmax);
    total += p[j];
  }
  for (double& v : p) v /= total;
  return p;
}

}  // namespace

Vector keep_top_k(const Vector& v, std::size_t k) {
  const auto sel = top_k_indices(v, k);
  Vector out(v.size(), kNegInf);
  for (const std::size_t i : sel) out[i] = v[i];
  return out;
}

Vector gate_forward(const GatingParams& g, const Vector& x, GateMode mode,
                    Rng* rng) {
  if (g.w_g.cols != x.size() || g.w_noise.cols != x.size() ||
      g.w_g.rows != g.w_noise.rows) {
    throw std::invalid_argument("gate_forward: dimension mismatch");
  }
  Vector h = matvec(g.w_g, x);
  if (mode == GateMode::Train) {
    if (rng == nullptr) {
      throw std::invalid_argument("gate_forward: train mode requires rng");
    }
    const Vector nz = matvec(g.w_noise, x);
    for (std::size_t i = 0; i < h.size(); ++i) {
      h[i] += rng->normal() * softplus(nz[i]);
    }
  }
  return softmax(keep_top_k(h, g.k));
}

double moe_predict(const MoeModel& m, const Vector& x, GateMode mode,
                   Rng* rng) {
  check_model(m, x.size());
  const Vector gate = gate_forward(m.gating, x, mode, rng);
  const bool logistic = m.experts.front().link == LinkKind::Logistic;
  double pred = 0.0;
  for (std::size_t i = 0; i < m.experts.size(); ++i) {
    if (gate[i] == 0.0) continue;
    const double mu =
        kernels::dot(m.experts[i].theta.data(), x.data(), x.size());
    pred += gate[i] * (logistic ? sigmoid(mu) : mu);
  }
  return pred;
}

Vector moe_predict_many(const MoeModel& m, const Matrix& x) {
  check_model(m, x.cols);
  Vector out(x.rows);
  Vector row(x.cols);
  for (std::size_t i = 0; i < x.rows; ++i) {
    std::copy(x.row(i), x.row(i) + x.cols, row.begin());
    out[i] = moe_predict(m, row);
  }
  return out;
}

double moe_nll(const MoeModel& m, const Dataset& ds) {
  check_model(m, ds.x.cols);
  const bool logistic = m.experts.front().link == LinkKind::Logistic;
  if (logistic) {
    return cross_entropy(moe_predict_many(m, ds.x), ds.y);
  }
  Vector row(ds.x.cols);
  double total = 0.0;
  for (std::size_t i = 0; i < ds.x.rows; ++i) {
    std::copy(ds.x.row(i), ds.x.row(i) + ds.x.cols, row.begin());
    const Vector gate = gate_forward(m.gating, row, GateMode::Eval);
    Vector terms;
    terms.reserve(m.gating.k);
    for (std::size_t e = 0; e < m.experts.size(); ++e) {
      if (gate[e] == 0.0) continue;
      const double mu =
          kernels::dot(m.experts[e].theta.data(), row.data(), row.size());
      terms.push_back(std::log(gate[e]) +
                      normal_logpdf(ds.y[i], mu, m.experts[e].noise_std));
    }
    total -= logsumexp(terms);
  }
  return total / static_cast<double>(ds.x.rows);
}

MoeGrads moe_loss_and_grad(
    const MoeModel& m, const Dataset& ds, const std::size_t* idx,
    std::size_t count, Rng* rng, bool noise,
    const std::vector<std::vector<std::size_t>>* frozen_selection) {
  const std::size_t d = ds.x.cols;
  check_model(m, d);
  if (count == 0) throw std::invalid_argument("moe_loss_and_grad: empty batch");
  if (noise && rng == nullptr) {
    throw std::invalid_argument("moe_loss_and_grad: noise requires rng");
  }
  if (frozen_selection != nullptr && frozen_selection->size() != count) {
    throw std::invalid_argument(
        "moe_loss_and_grad: frozen selection length mismatch");
  }
  const std::size_t n_experts = m.experts.size();
  const bool logistic = m.experts.front().link == LinkKind::Logistic;

  MoeGrads out;
  out.d_wg = Matrix(n_experts, d);
  out.d_wnoise = Matrix(n_experts, d);
  out.d_theta.assign(n_experts, Vector(d, 0.0));

  Vector h(n_experts), eps(n_experts), noise_sig(n_experts);
  for (std::size_t s = 0; s < count; ++s) {
    const double* row = ds.x.row(idx[s]);
    const double y = ds.y[idx[s]];

    for (std::size_t e = 0; e < n_experts; ++e) {
      h[e] = kernels::dot(m.gating.w_g.row(e), row, d);
    }
    if (noise) {
      for (std::size_t e = 0; e < n_experts; ++e) {
        const double nz = kernels::dot(m.gating.w_noise.row(e), row, d);
        eps[e] = rng->normal();
        noise_sig[e] = sigmoid(nz);
        h[e] += eps[e] * softplus(nz);
      }
    }
    const std::vector<std::size_t> sel =
        frozen_selection != nullptr ? (*frozen_selection)[s]
                                    : top_k_indices(h, m.gating.k);
    if (sel.empty() || sel.size() > n_experts) {
      throw std::invalid_argument("moe_loss_and_grad: bad selection");
    }
    for (std::size_t e : sel) {
      if (e >= n_experts) {
        throw std::invalid_argument(
            "moe_loss_and_grad: selection index out of range");
      }
    }
    const Vector gate = selected_softmax(h, sel);

    // expert outputs on the selected set
    Vector mu(sel.size()), expert_out(sel.size());
    double pred = 0.0;
    for (std::size_t j = 0; j < sel.size(); ++j) {
      mu[j] = kernels::dot(m.experts[sel[j]].theta.data(), row, d);
      expert_out[j] = logistic ? sigmoid(mu[j]) : mu[j];
      pred += gate[j] * expert_out[j];
    }

    double dpred;
    if (logistic) {
      const double p = std::clamp(pred, kProbClamp, 1.0 - kProbClamp);
      out.loss += -(y * std::log(p) + (1.0 - y) * std::log1p(-p));
      // the clamp makes the loss flat outside the bounds
      dpred = (pred <= kProbClamp || pred >= 1.0 - kProbClamp)
                  ? 0.0
                  : (pred - y) / (pred * (1.0 - pred));
    } else {
      const double r = pred - y;
      out.loss += r * r;
      dpred = 2.0 * r;
    }

    // u_j = dL/d gate_j; softmax backward: dh_j = gate_j (u_j - sum gate u)
    double udot = 0.0;
    for (std::size_t j = 0; j < sel.size(); ++j) {
      udot += gate[j] * dpred * expert_out[j];
    }
    for (std::size_t j = 0; j < sel.size(); ++j) {
      const std::size_t e = sel[j];
      const double dout =
          dpred * gate[j] *
          (logistic ? expert_out[j] * (1.0 - expert_out[j]) : 1.0);
      kernels::axpy(dout, row, out.d_theta[e].data(), d);
      const double dh = gate[j] * (dpred * expert_out[j] - udot);
      kernels::axpy(dh, row, out.d_wg.row(e), d);
      if (noise) {
        kernels::axpy(dh * eps[e] * noise_sig[e], row, out.d_wnoise.row(e),
                      d);
      }
    }
  }

  const double inv = 1.0 / static_cast<double>(count);
  out.loss *= inv;
  for (double& v : out.d_wg.data) v *= inv;
  for (double& v : out.d_wnoise.data) v *= inv;
  for (Vector& g : out.d_theta) {
    for (double& v : g) v *= inv;
  }
  return out;
}

MoeGrads moe_loss_and_grad(
    const MoeModel& m, const Dataset& batch, Rng* rng, bool noise,
    const std::vector<std::vector<std::size_t>>* frozen_selection) {
  std::vector<std::size_t> idx(batch.x.rows);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  return moe_loss_and_grad(m, batch, idx.data(), idx.size(), rng, noise,
                           frozen_selection);
}

void adam_step(AdamState& st, double* param, const double* grad,
               std::size_t n, double lr) {
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  if (st.m.size() != n) {
    st.m.assign(n, 0.0);
    st.v.assign(n, 0.0);
    st.t = 0;
  }
  ++st.t;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(st.t));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(st.t));
  for (std::size_t i = 0; i < n; ++i) {
    st.m[i] = kBeta1 * st.m[i] + (1.0 - kBeta1) * grad[i];
    st.v[i] = kBeta2 * st.v[i] + (1.0 - kBeta2) * grad[i] * grad[i];
    param[i] -= lr * (st.m[i] / bc1) / (std::sqrt(st.v[i] / bc2) + kEps);
  }
}

double lr_schedule(const TrainConfig& cfg, std::size_t epoch) {
  if (cfg.fixed_lr) return cfg.lr0;
  return cfg.lr0 * std::exp(-cfg.decay * static_cast<double>(epoch));
}

MoeModel init_moe(std::size_t n_experts, std::size_t d, std::size_t k,
                  LinkKind link, Rng& rng, double init_std) {
  if (n_experts == 0 || d == 0 || k < 1 || k > n_experts) {
    throw std::invalid_argument("init_moe: bad shape");
  }
  MoeModel m;
  m.gating.k = k;
  m.gating.w_g = Matrix(n_experts, d);
  m.gating.w_noise = Matrix(n_experts, d);
  for (double& v : m.gating.w_g.data) v = init_std * rng.normal();
  for (double& v : m.gating.w_noise.data) v = init_std * rng.normal();
  m.experts.resize(n_experts);
  for (GlmParams& e : m.experts) {
    e.link = link;
    e.noise_std = 0.1;
    e.theta.resize(d);
    for (double& v : e.theta) v = init_std * rng.normal();
  }
  return m;
}

MoeTrainResult train_moe(MoeModel m, const Dataset& train,
                         const TrainConfig& cfg) {
  if (!(cfg.lr0 > 0.0) || cfg.epochs < 1 || cfg.batch_size < 1) {
    throw std::invalid_argument("train_moe: invalid config");
  }
  const std::size_t n = train.x.rows;
  const std::size_t d = train.x.cols;
  check_model(m, d);

  Rng rng(cfg.seed);
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});

  const std::size_t n_experts = m.experts.size();
  AdamState st_wg, st_wnoise;
  std::vector<AdamState> st_theta(n_experts);

  MoeTrainResult out;
  out.epoch_loss.reserve(cfg.epochs);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(perm);
    const double lr = lr_schedule(cfg, epoch);
    double epoch_total = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < n; start += cfg.batch_size) {
      const std::size_t count = std::min(cfg.batch_size, n - start);
      MoeGrads g = moe_loss_and_grad(m, train, perm.data() + start, count,
                                     &rng, cfg.gate_noise);
      epoch_total += g.loss;
      ++n_batches;
      if (cfg.optimizer == OptKind::Adam) {
        adam_step(st_wg, m.gating.w_g.data.data(), g.d_wg.data.data(),
                  n_experts * d, lr);
        adam_step(st_wnoise, m.gating.w_noise.data.data(),
                  g.d_wnoise.data.data(), n_experts * d, lr);
        for (std::size_t e = 0; e < n_experts; ++e) {
          adam_step(st_theta[e], m.experts[e].theta.data(),
                    g.d_theta[e].data(), d, lr);
        }
      } else {
        kernels::axpy(-lr, g.d_wg.data.data(), m.gating.w_g.data.data(),
                      n_experts * d);
        kernels::axpy(-lr, g.d_wnoise.data.data(),
                      m.gating.w_noise.data.data(), n_experts * d);
        for (std::size_t e = 0; e < n_experts; ++e) {
          kernels::axpy(-lr, g.d_theta[e].data(), m.experts[e].theta.data(),
                        d);
        }
      }
    }
    out.epoch_loss.push_back(epoch_total / static_cast<double>(n_batches));
  }
  out.model = std::move(m);
  return out;
}

int piecewise_classify(const PiecewiseHypothesis& h, double x) {
  if (h.cells.empty() || h.cells.size() != h.experts.size()) {
    throw std::invalid_argument("piecewise_classify: malformed hypothesis");
  }
  for (std::size_t c = 0; c + 1 < h.cells.size(); ++c) {
    for (const Interval& iv : h.cells[c].intervals) {
      if (x >= iv.lo && x < iv.hi) return h.experts[c](x);
    }
  }
  return h.experts.back()(x);
}

}  // namespace moebench
