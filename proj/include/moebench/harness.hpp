#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "moebench/bayes.hpp"
#include "moebench/datagen.hpp"
#include "moebench/models.hpp"
#include "moebench/moe.hpp"

// Experiment orchestration. A suite crosses a model roster with a degree
// grid; every stochastic component draws from a substream derived from the
// master seed and its own label, so datasets do not depend on the roster and
// a single re-run cell reproduces its suite value. Reruns with one master
// seed produce byte-identical metrics CSVs; wall-clock timings go to a
// separate sidecar so the main CSV stays deterministic.
namespace moebench {

struct ExperimentConfig {
  std::string suite;          // "regression" | "classification"
  std::vector<int> degrees;   // empty: suite default (1..5 / 1..8)
  std::vector<std::string> roster;  // empty: suite default
  std::size_t n_train = 10000;
  std::size_t n_test = 2000;
  std::size_t n_mc = 100000;  // fresh draws for the risk estimate
  std::uint64_t master_seed = 0;
  std::string out_dir;  // empty: no files written, results returned only

  TrainConfig moe_regression;      // schedule 0.2 * exp(-0.75 * epoch)
  TrainConfig moe_classification;  // fixed lr 0.001, 200 epochs
  SghmcConfig sghmc;
  ViConfig vi;

  // The gated mixture carries several experts plus the router, so it gets a
  // longer fixed-rate budget than the 100 sampler/variational epochs.
  ExperimentConfig() {
    moe_classification.lr0 = 0.001;
    moe_classification.fixed_lr = true;
    moe_classification.epochs = 200;
  }
};

struct SuiteCell {
  MetricsRecord record;
  double mse_se = 0.0;   // standard error of the test MSE (regression)
  double risk_se = 0.0;  // standard error of the Monte-Carlo risk
  double seconds = 0.0;  // wall clock, reported only in the timings sidecar
};

struct SuiteResult {
  std::vector<SuiteCell> cells;  // sorted by (model, degree)
  std::string metrics_csv;
  std::string timings_csv;
};

// regression roster: blr, moe-2, moe-3, moe-4 over degrees 1..5
SuiteResult run_regression_suite(const ExperimentConfig& cfg);
// classification roster: moe-2, moe-3, moe-4, sghmc-lr, vi-lr over 1..8
SuiteResult run_classification_suite(const ExperimentConfig& cfg);

// metrics.csv and timings.csv under dir
void write_suite_outputs(const SuiteResult& res, const std::string& dir);

// substream derivations, shared with the single-cell CLI paths
std::uint64_t dataset_seed(std::uint64_t master, int degree);
std::uint64_t cell_seed(std::uint64_t master, const std::string& model,
                        int degree);
std::uint64_t risk_seed(std::uint64_t master, int degree);

}  // namespace moebench
