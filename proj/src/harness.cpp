#include "moebench/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "moebench/io.hpp"
#include "moebench/kernels.hpp"
#include "moebench/linalg.hpp"
#include "moebench/rng.hpp"

namespace moebench {
namespace {

constexpr double kNoiseStd = 0.1;  // shared by data, BLR and expert likelihoods

int expert_count(const std::string& model) {
  if (model == "moe-2") return 2;
  if (model == "moe-3") return 3;
  if (model == "moe-4") return 4;
  return 0;
}

std::vector<int> default_degrees(bool regression) {
  std::vector<int> out;
  for (int d = 1; d <= (regression ? 5 : 8); ++d) out.push_back(d);
  return out;
}

std::vector<std::string> default_roster(bool regression) {
  if (regression) return {"blr", "moe-2", "moe-3", "moe-4"};
  return {"moe-2", "moe-3", "moe-4", "sghmc-lr", "vi-lr"};
}

void validate(const ExperimentConfig& cfg, bool regression,
              const std::vector<int>& degrees,
              const std::vector<std::string>& roster) {
  for (int d : degrees) {
    int hi = regression ? 5 : 8;
    if (d < 1 || d > hi)
      throw std::invalid_argument("suite: degree " + std::to_string(d) +
                                  " out of range 1.." + std::to_string(hi));
  }
  for (const auto& m : roster) {
    bool moe = expert_count(m) > 0;
    bool ok = regression ? (moe || m == "blr")
                         : (moe || m == "sghmc-lr" || m == "vi-lr");
    if (!ok)
      throw std::invalid_argument("suite: model '" + m +
                                  "' not in the roster for this suite");
  }
  if (cfg.n_train == 0 || cfg.n_test == 0 || cfg.n_mc == 0)
    throw std::invalid_argument("suite: sample counts must be positive");
}

Predictor row_predictor(std::function<double(const Vector&)> f,
                        std::size_t d) {
  return [f = std::move(f), d](const double* row) {
    Vector x(row, row + d);
    return f(x);
  };
}

struct CellEval {
  MetricsRecord rec;
  double mse_se = 0.0;
  double risk_se = 0.0;
};

// mean squared error plus the standard error of the per-point squared errors
MeanWithSE mse_with_se(const Vector& pred, const Vector& y) {
  Vector sq(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    double e = pred[i] - y[i];
    sq[i] = e * e;
  }
  return mean_with_se(sq);
}

CellEval eval_regression_model(const std::string& model, int degree,
                               const DataBundle& bundle,
                               const ExperimentConfig& cfg) {
  std::uint64_t seed = cell_seed(cfg.master_seed, model, degree);
  const Dataset& tr = bundle.train;
  const Dataset& te = bundle.test;
  std::size_t d = tr.x.cols;

  Vector pred;
  double nll = 0.0;
  std::function<double(const Vector&)> point;

  if (model == "blr") {
    GaussianPosterior prior{Vector(d, 0.0), identity(d), kNoiseStd};
    GaussianPosterior post = blr_posterior(prior, tr);
    pred.resize(te.x.rows);
    for (std::size_t i = 0; i < te.x.rows; ++i)
      pred[i] = blr_predictive(post, Vector(te.x.row(i), te.x.row(i) + d)).mean;
    nll = blr_nll(post, te);
    point = [post](const Vector& x) { return kernels::dot(post.mu.data(), x.data(), x.size()); };
  } else {
    int experts = expert_count(model);
    Rng init_rng(mix_seed(seed, "init"));
    MoeModel m = init_moe(static_cast<std::size_t>(experts), d,
                          std::min<std::size_t>(2, experts),
                          LinkKind::Identity, init_rng);
    TrainConfig tc = cfg.moe_regression;
    tc.seed = mix_seed(seed, "train");
    MoeModel trained = train_moe(std::move(m), tr, tc).model;
    pred = moe_predict_many(trained, te.x);
    nll = moe_nll(trained, te);
    point = [trained = std::move(trained)](const Vector& x) {
      return moe_predict(trained, x);
    };
  }

  MeanWithSE m = mse_with_se(pred, te.y);
  MeanWithSE r = frequentist_risk(row_predictor(point, d), bundle.spec,
                                  cfg.n_mc, risk_seed(cfg.master_seed, degree));

  CellEval out;
  out.rec.model = model;
  out.rec.degree = degree;
  out.rec.mse = m.mean;
  out.rec.nll = nll;
  out.rec.risk = r.mean;
  out.rec.seed = seed;
  out.mse_se = m.std_err;
  out.risk_se = r.std_err;
  return out;
}

CellEval eval_classification_model(const std::string& model, int degree,
                                   const DataBundle& bundle,
                                   const ExperimentConfig& cfg) {
  std::uint64_t seed = cell_seed(cfg.master_seed, model, degree);
  const Dataset& tr = bundle.train;
  const Dataset& te = bundle.test;
  std::size_t d = tr.x.cols;

  Vector prob;
  std::function<double(const Vector&)> point;

  if (int experts = expert_count(model); experts > 0) {
    Rng init_rng(mix_seed(seed, "init"));
    MoeModel m = init_moe(static_cast<std::size_t>(experts), d,
                          std::min<std::size_t>(2, experts),
                          LinkKind::Logistic, init_rng);
    TrainConfig tc = cfg.moe_classification;
    tc.seed = mix_seed(seed, "train");
    MoeModel trained = train_moe(std::move(m), tr, tc).model;
    prob = moe_predict_many(trained, te.x);
    point = [trained = std::move(trained)](const Vector& x) {
      return moe_predict(trained, x);
    };
  } else {
    PosteriorSamples samples;
    if (model == "sghmc-lr") {
      SghmcConfig sc = cfg.sghmc;
      sc.seed = mix_seed(seed, "sample");
      samples = sghmc_sample(GlmParams{Vector(d, 0.0), LinkKind::Logistic,
                                       kNoiseStd},
                             tr, sc);
    } else {
      ViConfig vc = cfg.vi;
      vc.seed = mix_seed(seed, "fit");
      ViResult fit = vi_fit(GlmParams{Vector(d, 0.0), LinkKind::Logistic,
                                   kNoiseStd},
                         tr, vc);
      samples = vi_draw_samples(fit, vc.inference_samples,
                                mix_seed(seed, "inference"));
    }
    prob = bma_predict_many(samples, te.x);
    point = [samples](const Vector& x) { return bma_predict(samples, x); };
  }

  MeanWithSE r = frequentist_risk(row_predictor(point, d), bundle.spec,
                                  cfg.n_mc, risk_seed(cfg.master_seed, degree));

  CellEval out;
  out.rec.model = model;
  out.rec.degree = degree;
  out.rec.nll = cross_entropy(prob, te.y);
  out.rec.accuracy = accuracy(prob, te.y);
  out.rec.risk = r.mean;
  out.rec.seed = seed;
  out.risk_se = r.std_err;
  return out;
}

void sort_cells(std::vector<SuiteCell>& cells) {
  std::sort(cells.begin(), cells.end(),
            [](const SuiteCell& a, const SuiteCell& b) {
              if (a.record.model != b.record.model)
                return a.record.model < b.record.model;
              return a.record.degree < b.record.degree;
            });
}

std::string build_metrics_csv(const std::vector<SuiteCell>& cells) {
  std::string out = metrics_csv_header();
  out.push_back('\n');
  for (const auto& c : cells) {
    out += metrics_csv_row(c.record);
    out.push_back('\n');
  }
  return out;
}

std::string build_timings_csv(const std::vector<SuiteCell>& cells) {
  std::string out = "model,degree,seconds,seed\n";
  for (const auto& c : cells) {
    out += c.record.model;
    out.push_back(',');
    out += std::to_string(c.record.degree);
    out.push_back(',');
    out += format_double(c.seconds);
    out.push_back(',');
    out += std::to_string(c.record.seed);
    out.push_back('\n');
  }
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path);
}

SuiteResult run_suite(const ExperimentConfig& cfg, bool regression) {
  std::vector<int> degrees =
      cfg.degrees.empty() ? default_degrees(regression) : cfg.degrees;
  std::vector<std::string> roster =
      cfg.roster.empty() ? default_roster(regression) : cfg.roster;
  validate(cfg, regression, degrees, roster);

  SuiteResult res;
  for (int degree : degrees) {
    std::uint64_t dseed = dataset_seed(cfg.master_seed, degree);
    DataBundle bundle =
        regression
            ? gen_regression(degree, cfg.n_train, cfg.n_test, dseed)
            : gen_classification(degree, cfg.n_train, cfg.n_test, dseed);
    for (const auto& model : roster) {
      auto t0 = std::chrono::steady_clock::now();
      try {
        CellEval cell = regression
                            ? eval_regression_model(model, degree, bundle, cfg)
                            : eval_classification_model(model, degree, bundle,
                                                        cfg);
        for (const auto& metric :
             {cell.rec.mse, cell.rec.nll, cell.rec.accuracy, cell.rec.risk}) {
          if (metric && !std::isfinite(*metric))
            throw std::runtime_error("non-finite metric");
        }
        SuiteCell sc;
        sc.record = cell.rec;
        sc.mse_se = cell.mse_se;
        sc.risk_se = cell.risk_se;
        sc.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                .count();
        res.cells.push_back(std::move(sc));
      } catch (const std::exception& e) {
        // flush what finished so a long run is not lost, then re-raise
        // with the failing cell named
        sort_cells(res.cells);
        res.metrics_csv = build_metrics_csv(res.cells);
        res.timings_csv = build_timings_csv(res.cells);
        if (!cfg.out_dir.empty()) write_suite_outputs(res, cfg.out_dir);
        throw std::runtime_error("suite cell " + model + "/degree " +
                                 std::to_string(degree) + ": " + e.what());
      }
    }
  }

  sort_cells(res.cells);
  res.metrics_csv = build_metrics_csv(res.cells);
  res.timings_csv = build_timings_csv(res.cells);
  if (!cfg.out_dir.empty()) write_suite_outputs(res, cfg.out_dir);
  return res;
}

}  // namespace

std::uint64_t dataset_seed(std::uint64_t master, int degree) {
  return mix_seed(master, "data", static_cast<std::uint64_t>(degree));
}

std::uint64_t cell_seed(std::uint64_t master, const std::string& model,
                        int degree) {
  return mix_seed(master, model, static_cast<std::uint64_t>(degree));
}

std::uint64_t risk_seed(std::uint64_t master, int degree) {
  // shared across the roster so per-degree risk comparisons use common draws
  return mix_seed(master, "risk", static_cast<std::uint64_t>(degree));
}

SuiteResult run_regression_suite(const ExperimentConfig& cfg) {
  return run_suite(cfg, true);
}

SuiteResult run_classification_suite(const ExperimentConfig& cfg) {
  return run_suite(cfg, false);
}

void write_suite_outputs(const SuiteResult& res, const std::string& dir) {
  write_file(dir + "/metrics.csv", res.metrics_csv);
  write_file(dir + "/timings.csv", res.timings_csv);
}

}  // namespace moebench
