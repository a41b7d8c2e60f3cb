#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "moebench/models.hpp"
#include "moebench/rng.hpp"

// Sparse mixture of experts with noisy top-k gating. Gate logits are
// H(x)_i = (W_g x)_i + eps_i * softplus((W_noise x)_i) with eps ~ N(0,1)
// during training and eps = 0 at eval; probabilities are the softmax of the
// top-k logits, everything else exactly 0. The model's point prediction is
// the gated convex combination of expert means (identity link) or expert
// probabilities (logistic link).
namespace moebench {

struct GatingParams {
  Matrix w_g;      // n_experts x d
  Matrix w_noise;  // n_experts x d
  std::size_t k = 1;
};

struct MoeModel {
  GatingParams gating;
  std::vector<GlmParams> experts;  // homogeneous link and dimension
};

enum class GateMode { Train, Eval };

enum class OptKind { Adam, Sgd };

struct TrainConfig {
  OptKind optimizer = OptKind::Adam;
  double lr0 = 0.2;
  double decay = 0.75;  // per-epoch exponential decay, ignored when fixed_lr
  bool fixed_lr = false;
  std::size_t epochs = 30;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  bool gate_noise = true;
};

// Top-k entries keep their value, the rest become -inf; ties broken by
// lowest index. 1 <= k <= len(v).
Vector keep_top_k(const Vector& v, std::size_t k);

// Probability vector with at most k nonzero entries. Train mode draws one
// eps per expert from rng (required); eval mode is deterministic.
Vector gate_forward(const GatingParams& g, const Vector& x, GateMode mode,
                    Rng* rng = nullptr);

double moe_predict(const MoeModel& m, const Vector& x,
                   GateMode mode = GateMode::Eval, Rng* rng = nullptr);
Vector moe_predict_many(const MoeModel& m, const Matrix& x);

// Mean per-point negative log predictive with the eval-mode gate: Gaussian
// mixture density for identity link, cross-entropy of the gated probability
// for logistic link.
double moe_nll(const MoeModel& m, const Dataset& ds);

struct MoeGrads {
  double loss = 0.0;
  Matrix d_wg;
  Matrix d_wnoise;
  std::vector<Vector> d_theta;
};

// Loss over the given rows: mean squared error of the gated mean (identity)
// or mean cross-entropy of the gated probability (logistic). The top-k
// selection is treated as constant: gradient reaches only surviving logits.
// With noise enabled, one eps per (sample, expert) is drawn from rng in row
// order. frozen_selection (one sorted index set of size k per row) overrides
// the computed selection; the finite-difference tests use it to keep the
// loss differentiable at the evaluation point.
MoeGrads moe_loss_and_grad(
    const MoeModel& m, const Dataset& ds, const std::size_t* idx,
    std::size_t count, Rng* rng, bool noise,
    const std::vector<std::vector<std::size_t>>* frozen_selection = nullptr);
MoeGrads moe_loss_and_grad(
    const MoeModel& m, const Dataset& batch, Rng* rng, bool noise,
    const std::vector<std::vector<std::size_t>>* frozen_selection = nullptr);

struct AdamState {
  Vector m;
  Vector v;
  std::size_t t = 0;
};

// One Adam update (beta1 = 0.9, beta2 = 0.999, eps = 1e-8) with bias
// correction; st.m/st.v are lazily sized on first call.
void adam_step(AdamState& st, double* param, const double* grad,
               std::size_t n, double lr);

// lr0 * exp(-decay * epoch) unless fixed_lr; epochs count from 0.
double lr_schedule(const TrainConfig& cfg, std::size_t epoch);

// All weights from N(0, init_std^2), drawn in the order W_g, W_noise,
// theta_0 .. theta_{E-1} (rows major). Identity-link experts carry
// noise_std 0.1.
MoeModel init_moe(std::size_t n_experts, std::size_t d, std::size_t k,
                  LinkKind link, Rng& rng, double init_std = 0.1);

struct MoeTrainResult {
  MoeModel model;
  Vector epoch_loss;  // mean batch loss per epoch, length = cfg.epochs
};

// Mini-batch training with the configured optimizer. Rng discipline, pinned
// so trajectories are reproducible: one generator seeded with cfg.seed; per
// epoch, one shuffle of the row permutation, then per batch the gating-noise
// draws (when enabled) in row order. The final partial batch is kept.
MoeTrainResult train_moe(MoeModel m, const Dataset& train,
                         const TrainConfig& cfg);

// Top-expert limit: a piecewise binary classifier over the reals. Cells are
// finite unions of half-open intervals [lo, hi); the first cell containing x
// wins, and the last cell is the catch-all for everything not covered
// earlier.
struct Interval {
  double lo;
  double hi;
};

struct PiecewiseCell {
  std::vector<Interval> intervals;
};

struct PiecewiseHypothesis {
  std::vector<PiecewiseCell> cells;                 // last cell: catch-all
  std::vector<std::function<int(double)>> experts;  // one per cell
};

int piecewise_classify(const PiecewiseHypothesis& h, double x);

}  // namespace moebench
