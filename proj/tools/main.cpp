#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "moebench/bayes.hpp"
#include "moebench/datagen.hpp"
#include "moebench/harness.hpp"
#include "moebench/io.hpp"
#include "moebench/models.hpp"
#include "moebench/moe.hpp"
#include "moebench/rng.hpp"
#include "moebench/vcdim.hpp"

// Exit codes: 0 success, 1 runtime failure (a suite cell, a failed
// proposition check, a bad input file), 2 configuration error (bad flags or
// an invalid experiment description).
namespace {

using namespace moebench;

// generator noise std, shared with the dataset recipes and the regression
// likelihoods
constexpr double kNoiseStd = 0.1;

std::string default_out_dir() {
  const char* env = std::getenv("MOEBENCH_OUT_DIR");
  if (env != nullptr && env[0] != '\0') return env;
  return ".";
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path);
}

std::size_t expert_count(const std::string& model) {
  if (model.rfind("moe-", 0) != 0) return 0;
  return static_cast<std::size_t>(std::stoul(model.substr(4)));
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::map<std::string, std::string> read_config_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::map<std::string, std::string> pairs;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::size_t eq = t.find('=');
    if (eq == std::string::npos || eq == 0)
      throw std::invalid_argument(path + " line " + std::to_string(lineno) +
                                  ": expected key=value");
    pairs[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return pairs;
}

// --config FILE pre-pass: file values become flags for any option the
// command line did not set, so explicit flags override the file and CLI11
// still validates every value. Alternate seed spellings are suppressed
// together, otherwise a file seed would collide with a command-line
// master-seed.
std::vector<std::string> apply_config_file(std::vector<std::string> args) {
  std::string cfg_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      cfg_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i),
                 args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      cfg_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (cfg_path.empty()) return args;

  std::map<std::string, std::string> pairs = read_config_pairs(cfg_path);
  std::vector<std::string> given;
  for (const std::string& a : args) {
    if (a.rfind("--", 0) != 0) continue;
    std::size_t eq = a.find('=');
    given.push_back(a.substr(2, eq == std::string::npos ? eq : eq - 2));
  }
  auto has = [&given](const std::string& k) {
    return std::find(given.begin(), given.end(), k) != given.end();
  };
  static const std::pair<const char*, const char*> kAlternates[] = {
      {"seed", "master-seed"}, {"risk-seed", "master-seed"}};
  for (const auto& [x, y] : kAlternates) {
    if (has(x) || has(y)) {
      pairs.erase(x);
      pairs.erase(y);
    }
  }
  for (const auto& [k, v] : pairs) {
    if (has(k)) continue;
    args.push_back("--" + k);
    args.push_back(v);
  }
  return args;
}

// ---------------------------------------------------------------------------
// gen-data

struct GenDataArgs {
  std::string suite;
  int degree = 1;
  std::size_t n_train = 10000;
  std::size_t n_test = 2000;
  std::uint64_t seed = 0;
  std::uint64_t master_seed = 0;
  bool derive_seed = false;
  std::string out;
};

int run_gen_data(const GenDataArgs& a) {
  std::uint64_t seed =
      a.derive_seed ? dataset_seed(a.master_seed, a.degree) : a.seed;
  DataBundle b = a.suite == "regression"
                     ? gen_regression(a.degree, a.n_train, a.n_test, seed)
                     : gen_classification(a.degree, a.n_train, a.n_test, seed);
  std::string dir = a.out.empty() ? default_out_dir() : a.out;
  std::filesystem::create_directories(dir);
  save_dataset(b.train, join_path(dir, "train.csv"),
               join_path(dir, "train.meta"));
  save_dataset(b.test, join_path(dir, "test.csv"), join_path(dir, "test.meta"));
  std::printf("wrote %s and %s (.csv + .meta), seed %llu\n",
              join_path(dir, "train").c_str(), join_path(dir, "test").c_str(),
              static_cast<unsigned long long>(seed));
  return 0;
}

// ---------------------------------------------------------------------------
// train

struct TrainArgs {
  std::string model;
  std::string data;
  std::string out;
  std::uint64_t seed = 0;
  std::uint64_t master_seed = 0;
  bool derive_seed = false;
  std::size_t epochs = 0;
  double lr0 = 0.0;
  double decay = 0.0;
  std::size_t batch_size = 0;
  std::size_t burn_in = 0;
  std::size_t samples = 0;
  std::size_t mc_samples = 0;
  std::size_t inference_samples = 0;
  double temperature = 0.0;
};

int run_train(const CLI::App& cmd, const TrainArgs& a) {
  Dataset tr = load_dataset(a.data + ".csv", a.data + ".meta");
  bool classify = tr.spec.kind == TaskKind::Classification;
  std::size_t d = tr.x.cols;
  std::uint64_t cs = a.derive_seed
                         ? cell_seed(a.master_seed, a.model, tr.spec.degree)
                         : a.seed;
  std::string out =
      a.out.empty() ? join_path(default_out_dir(), a.model + ".ckpt") : a.out;

  if (a.model == "blr") {
    if (classify)
      throw std::invalid_argument("blr trains on regression data only");
    GaussianPosterior prior{Vector(d, 0.0), identity(d), kNoiseStd};
    save_blr(blr_posterior(prior, tr), out);
  } else if (std::size_t experts = expert_count(a.model); experts > 0) {
    TrainConfig tc;
    if (classify) {
      tc.lr0 = 0.001;
      tc.fixed_lr = true;
    }
    if (cmd.count("--epochs") > 0) tc.epochs = a.epochs;
    if (cmd.count("--lr0") > 0) tc.lr0 = a.lr0;
    if (cmd.count("--decay") > 0) tc.decay = a.decay;
    if (cmd.count("--batch-size") > 0) tc.batch_size = a.batch_size;
    tc.seed = mix_seed(cs, "train");
    Rng init_rng(mix_seed(cs, "init"));
    MoeModel m =
        init_moe(experts, d, std::min<std::size_t>(2, experts),
                 classify ? LinkKind::Logistic : LinkKind::Identity, init_rng);
    MoeTrainResult res = train_moe(std::move(m), tr, tc);
    save_moe(res.model, out);
    std::printf("final epoch loss %s\n",
                format_double(res.epoch_loss.back()).c_str());
  } else if (a.model == "sghmc-lr") {
    if (!classify)
      throw std::invalid_argument("sghmc-lr trains on classification data only");
    SghmcConfig sc;
    if (cmd.count("--burn-in") > 0) sc.burn_in = a.burn_in;
    if (cmd.count("--samples") > 0) sc.n_samples = a.samples;
    if (cmd.count("--batch-size") > 0) sc.batch_size = a.batch_size;
    if (cmd.count("--lr0") > 0) sc.lr0 = a.lr0;
    if (cmd.count("--decay") > 0) sc.decay = a.decay;
    sc.seed = mix_seed(cs, "sample");
    GlmParams model{Vector(d, 0.0), LinkKind::Logistic, kNoiseStd};
    save_samples(sghmc_sample(model, tr, sc), out);
  } else {
    if (!classify)
      throw std::invalid_argument("vi-lr trains on classification data only");
    ViConfig vc;
    if (cmd.count("--epochs") > 0) vc.epochs = a.epochs;
    if (cmd.count("--batch-size") > 0) vc.batch_size = a.batch_size;
    if (cmd.count("--mc-samples") > 0) vc.mc_samples = a.mc_samples;
    if (cmd.count("--inference-samples") > 0)
      vc.inference_samples = a.inference_samples;
    if (cmd.count("--temperature") > 0) vc.temperature = a.temperature;
    vc.seed = mix_seed(cs, "fit");
    GlmParams model{Vector(d, 0.0), LinkKind::Logistic, kNoiseStd};
    ViResult fit = vi_fit(model, tr, vc);
    save_samples(
        vi_draw_samples(fit, vc.inference_samples, mix_seed(cs, "inference")),
        out);
  }
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalArgs {
  std::string model_file;
  std::string data;
  std::string out;
  std::size_t n_mc = 100000;
  std::uint64_t seed = 0;
  std::uint64_t master_seed = 0;
  bool derive_seed = false;
};

int run_eval(const EvalArgs& a) {
  Dataset te = load_dataset(a.data + ".csv", a.data + ".meta");
  std::size_t d = te.x.cols;
  std::uint64_t rseed =
      a.derive_seed ? risk_seed(a.master_seed, te.spec.degree) : a.seed;

  MetricsRecord rec;
  rec.degree = te.spec.degree;
  rec.seed = rseed;
  Predictor pred;
  switch (peek_checkpoint_kind(a.model_file)) {
    case CheckpointKind::Moe: {
      MoeModel m = load_moe(a.model_file);
      rec.model = "moe-" + std::to_string(m.experts.size());
      Vector preds = moe_predict_many(m, te.x);
      rec.nll = moe_nll(m, te);
      if (m.experts.front().link == LinkKind::Identity)
        rec.mse = mse(preds, te.y);
      else
        rec.accuracy = accuracy(preds, te.y);
      pred = [m = std::move(m), d](const double* row) {
        return moe_predict(m, Vector(row, row + d));
      };
      break;
    }
    case CheckpointKind::BlrPosterior: {
      GaussianPosterior post = load_blr(a.model_file);
      rec.model = "blr";
      Vector means(te.x.rows, 0.0);
      for (std::size_t i = 0; i < te.x.rows; ++i) {
        const double* row = te.x.row(i);
        for (std::size_t j = 0; j < d; ++j) means[i] += post.mu[j] * row[j];
      }
      rec.mse = mse(means, te.y);
      rec.nll = blr_nll(post, te);
      pred = [post = std::move(post), d](const double* row) {
        double s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += post.mu[j] * row[j];
        return s;
      };
      break;
    }
    case CheckpointKind::PosteriorSamples: {
      PosteriorSamples s = load_samples(a.model_file);
      rec.model = s.provenance == SamplerKind::Sghmc ? "sghmc-lr" : "vi-lr";
      Vector probs = bma_predict_many(s, te.x);
      rec.accuracy = accuracy(probs, te.y);
      rec.nll = cross_entropy(probs, te.y);
      pred = [s = std::move(s), d](const double* row) {
        return bma_predict(s, Vector(row, row + d));
      };
      break;
    }
  }
  rec.risk = frequentist_risk(pred, te.spec, a.n_mc, rseed).mean;

  std::string csv = metrics_csv_header() + "\n" + metrics_csv_row(rec) + "\n";
  std::fputs(csv.c_str(), stdout);
  if (!a.out.empty()) {
    write_text_file(a.out, csv);
    std::printf("wrote %s\n", a.out.c_str());
  }
  return 0;
}

// ---------------------------------------------------------------------------
// run-suite

struct SuiteArgs {
  std::string suite;
  std::vector<int> degrees;
  std::vector<std::string> roster;
  std::size_t n_train = 10000;
  std::size_t n_test = 2000;
  std::size_t n_mc = 100000;
  std::uint64_t seed = 0;
  std::string out;
  std::size_t moe_epochs = 0;
  std::size_t sghmc_burn_in = 0;
  std::size_t sghmc_samples = 0;
  std::size_t vi_epochs = 0;
  std::size_t vi_mc_samples = 0;
};

int run_run_suite(const CLI::App& cmd, const SuiteArgs& a) {
  ExperimentConfig cfg;
  cfg.suite = a.suite;
  cfg.degrees = a.degrees;
  cfg.roster = a.roster;
  cfg.n_train = a.n_train;
  cfg.n_test = a.n_test;
  cfg.n_mc = a.n_mc;
  cfg.master_seed = a.seed;
  cfg.out_dir = a.out.empty() ? default_out_dir() : a.out;
  if (cmd.count("--moe-epochs") > 0) {
    cfg.moe_regression.epochs = a.moe_epochs;
    cfg.moe_classification.epochs = a.moe_epochs;
  }
  if (cmd.count("--sghmc-burn-in") > 0) cfg.sghmc.burn_in = a.sghmc_burn_in;
  if (cmd.count("--sghmc-samples") > 0) cfg.sghmc.n_samples = a.sghmc_samples;
  if (cmd.count("--vi-epochs") > 0) cfg.vi.epochs = a.vi_epochs;
  if (cmd.count("--vi-mc-samples") > 0) cfg.vi.mc_samples = a.vi_mc_samples;

  std::filesystem::create_directories(cfg.out_dir);
  SuiteResult res = a.suite == "regression" ? run_regression_suite(cfg)
                                            : run_classification_suite(cfg);
  std::fputs(res.metrics_csv.c_str(), stdout);
  std::printf("wrote %s and %s\n",
              join_path(cfg.out_dir, "metrics.csv").c_str(),
              join_path(cfg.out_dir, "timings.csv").c_str());
  return 0;
}

// ---------------------------------------------------------------------------
// verify-proposition

struct VerifyArgs {
  std::size_t n = 1;
  std::string family = "affine-thresholds";
};

std::unique_ptr<ClassifierFamily> make_family(const std::string& name) {
  if (name == "affine-thresholds")
    return std::make_unique<AffineThresholdFamily>();
  if (name == "intervals") return std::make_unique<IntervalFamily>();
  return std::make_unique<ConstantFamily>();
}

int run_verify(const VerifyArgs& a) {
  std::unique_ptr<ClassifierFamily> fam = make_family(a.family);
  PropositionReport rep = verify_proposition(a.n, *fam);

  std::string witness;
  for (double v : rep.witness) {
    if (!witness.empty()) witness += ' ';
    witness += format_double(v);
  }
  std::printf("family %s: capacity lower bound m=%zu (witness: %s)\n",
              fam->name().c_str(), rep.m, witness.c_str());
  std::printf("%zu translated copies, %zu construction points, %llu labelings\n",
              rep.n, rep.points,
              static_cast<unsigned long long>(1ull << rep.points));
  if (rep.ok)
    std::printf("all labelings realized by piecewise hypotheses\n");
  else
    std::printf("FAILED after %llu labelings: %s\n",
                static_cast<unsigned long long>(rep.labelings_checked),
                rep.failure.c_str());
  std::printf("n=%zu,m=%zu,points=%zu,labelings_checked=%llu,ok=%s\n", rep.n,
              rep.m, rep.points,
              static_cast<unsigned long long>(rep.labelings_checked),
              rep.ok ? "true" : "false");
  return rep.ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// plot

struct PlotArgs {
  std::string metrics;
  std::string metric = "mse";
  std::string out;
};

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string fmt_tick(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

using Series = std::map<std::string, std::vector<std::pair<double, double>>>;

std::string render_line_chart(const std::string& ylabel, const Series& series) {
  constexpr double kW = 720.0, kH = 440.0;
  constexpr double kL = 70.0, kR = 160.0, kT = 46.0, kB = 52.0;
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                   "#ff7f0e", "#9467bd", "#8c564b"};
  constexpr std::size_t kPaletteSize = sizeof kPalette / sizeof kPalette[0];

  double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
  bool first = true;
  std::vector<double> xticks;
  for (const auto& [name, pts] : series) {
    for (const auto& [x, y] : pts) {
      if (first) {
        x0 = x1 = x;
        y0 = y1 = y;
        first = false;
      }
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
      if (std::find(xticks.begin(), xticks.end(), x) == xticks.end())
        xticks.push_back(x);
    }
  }
  std::sort(xticks.begin(), xticks.end());
  if (x1 - x0 < 1e-12) {
    x0 -= 1.0;
    x1 += 1.0;
  }
  if (y1 - y0 < 1e-12) {
    y0 -= 1.0;
    y1 += 1.0;
  }
  x0 -= 0.3;
  x1 += 0.3;
  double pad = 0.06 * (y1 - y0);
  y0 -= pad;
  y1 += pad;

  auto px = [&](double x) { return kL + (x - x0) / (x1 - x0) * (kW - kL - kR); };
  auto py = [&](double y) {
    return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB);
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW
    << "\" height=\"" << kH << "\" viewBox=\"0 0 " << kW << ' ' << kH
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  s << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
  s << "<text x=\"" << (kL + (kW - kL - kR) / 2) << "\" y=\"24\" "
    << "text-anchor=\"middle\" font-size=\"15\">" << ylabel
    << " vs degree</text>\n";

  for (int i = 0; i <= 4; ++i) {
    double y = y0 + pad + (y1 - y0 - 2 * pad) * i / 4.0;
    s << "<line x1=\"" << kL << "\" y1=\"" << py(y) << "\" x2=\"" << (kW - kR)
      << "\" y2=\"" << py(y) << "\" stroke=\"#ddd\"/>\n";
    s << "<text x=\"" << (kL - 8) << "\" y=\"" << (py(y) + 4)
      << "\" text-anchor=\"end\">" << fmt_tick(y) << "</text>\n";
  }
  for (double x : xticks) {
    s << "<line x1=\"" << px(x) << "\" y1=\"" << (kH - kB) << "\" x2=\""
      << px(x) << "\" y2=\"" << (kH - kB + 5) << "\" stroke=\"#444\"/>\n";
    s << "<text x=\"" << px(x) << "\" y=\"" << (kH - kB + 20)
      << "\" text-anchor=\"middle\">" << fmt_tick(x) << "</text>\n";
  }
  s << "<line x1=\"" << kL << "\" y1=\"" << (kH - kB) << "\" x2=\""
    << (kW - kR) << "\" y2=\"" << (kH - kB) << "\" stroke=\"#444\"/>\n";
  s << "<line x1=\"" << kL << "\" y1=\"" << kT << "\" x2=\"" << kL
    << "\" y2=\"" << (kH - kB) << "\" stroke=\"#444\"/>\n";
  s << "<text x=\"" << (kL + (kW - kL - kR) / 2) << "\" y=\"" << (kH - 14)
    << "\" text-anchor=\"middle\">degree</text>\n";

  std::size_t idx = 0;
  for (const auto& [name, pts] : series) {
    const char* color = kPalette[idx % kPaletteSize];
    s << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"2\" points=\"";
    for (const auto& [x, y] : pts) s << px(x) << ',' << py(y) << ' ';
    s << "\"/>\n";
    for (const auto& [x, y] : pts)
      s << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y)
        << "\" r=\"3\" fill=\"" << color << "\"/>\n";
    double ly = kT + 18.0 * static_cast<double>(idx);
    s << "<line x1=\"" << (kW - kR + 14) << "\" y1=\"" << ly << "\" x2=\""
      << (kW - kR + 38) << "\" y2=\"" << ly << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    s << "<text x=\"" << (kW - kR + 44) << "\" y=\"" << (ly + 4) << "\">"
      << name << "</text>\n";
    ++idx;
  }
  s << "</svg>\n";
  return s.str();
}

int run_plot(const PlotArgs& a) {
  std::ifstream in(a.metrics);
  if (!in) throw std::runtime_error("cannot open " + a.metrics);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(a.metrics + ": empty file");
  std::vector<std::string> head = split_fields(line);
  static const std::map<std::string, std::size_t> kColumns = {
      {"mse", 2}, {"nll", 3}, {"accuracy", 4}, {"risk", 5}};
  std::size_t col = kColumns.at(a.metric);
  if (head.size() < 8 || head[0] != "model" || head[1] != "degree" ||
      head[col] != a.metric)
    throw std::runtime_error(a.metrics + ": unrecognized metrics header");

  Series series;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f = split_fields(line);
    if (f.size() != head.size())
      throw std::runtime_error(a.metrics + " line " + std::to_string(lineno) +
                               ": wrong field count");
    if (f[col].empty()) continue;
    try {
      series[f[0]].emplace_back(parse_double(f[1]), parse_double(f[col]));
    } catch (const std::invalid_argument& e) {
      throw std::runtime_error(a.metrics + " line " + std::to_string(lineno) +
                               ": " + e.what());
    }
  }
  if (series.empty())
    throw std::runtime_error(a.metrics + ": no rows carry a value for " +
                             a.metric);
  for (auto& [name, pts] : series) std::sort(pts.begin(), pts.end());

  std::string out =
      a.out.empty() ? join_path(default_out_dir(), "plot-" + a.metric + ".svg")
                    : a.out;
  write_text_file(out, render_line_chart(a.metric, series));
  std::printf("wrote %s\n", out.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixture-of-experts vs Bayesian model averaging benchmark"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  int rc = 0;

  GenDataArgs gd;
  CLI::App* gen = app.add_subcommand(
      "gen-data", "generate a synthetic dataset and write train/test splits");
  gen->set_help_flag("--help", "print help");
  std::string cfg_dummy_gen;
  gen->add_option("--config", cfg_dummy_gen,
                  "key=value defaults; flags override (applied in a pre-pass)");
  gen->add_option("--suite", gd.suite, "dataset family")
      ->required()
      ->check(CLI::IsMember({"regression", "classification"}));
  gen->add_option("--degree", gd.degree, "polynomial degree")->required();
  gen->add_option("--n-train", gd.n_train, "training rows")
      ->capture_default_str();
  gen->add_option("--n-test", gd.n_test, "test rows")->capture_default_str();
  CLI::Option* gd_seed =
      gen->add_option("--seed", gd.seed, "generator seed")->capture_default_str();
  CLI::Option* gd_master = gen->add_option(
      "--master-seed", gd.master_seed,
      "derive the generator seed from a suite master seed instead");
  gd_seed->excludes(gd_master);
  gd_master->excludes(gd_seed);
  gen->add_option("--out", gd.out, "output directory")
      ->envname("MOEBENCH_OUT_DIR");
  gen->callback([&] {
    gd.derive_seed = gd_master->count() > 0;
    rc = run_gen_data(gd);
  });

  TrainArgs ta;
  CLI::App* trn = app.add_subcommand(
      "train", "fit one model on a saved dataset and write a checkpoint");
  trn->set_help_flag("--help", "print help");
  std::string cfg_dummy_trn;
  trn->add_option("--config", cfg_dummy_trn,
                  "key=value defaults; flags override (applied in a pre-pass)");
  trn->add_option("--model", ta.model, "model name")
      ->required()
      ->check(CLI::IsMember(
          {"blr", "moe-2", "moe-3", "moe-4", "sghmc-lr", "vi-lr"}));
  trn->add_option("--data", ta.data,
                  "dataset path prefix (reads <prefix>.csv and <prefix>.meta)")
      ->required();
  trn->add_option("--out", ta.out,
                  "checkpoint path (default <out-dir>/<model>.ckpt)");
  CLI::Option* ta_seed =
      trn->add_option("--seed", ta.seed, "cell seed")->capture_default_str();
  CLI::Option* ta_master = trn->add_option(
      "--master-seed", ta.master_seed,
      "derive the cell seed from a suite master seed instead");
  ta_seed->excludes(ta_master);
  ta_master->excludes(ta_seed);
  trn->add_option("--epochs", ta.epochs, "override the per-model default");
  trn->add_option("--lr0", ta.lr0, "override the per-model default");
  trn->add_option("--decay", ta.decay, "override the per-model default");
  trn->add_option("--batch-size", ta.batch_size,
                  "override the per-model default");
  trn->add_option("--burn-in", ta.burn_in, "sampler burn-in epochs");
  trn->add_option("--samples", ta.samples, "posterior samples to collect");
  trn->add_option("--mc-samples", ta.mc_samples,
                  "variational gradient draws per step");
  trn->add_option("--inference-samples", ta.inference_samples,
                  "variational draws kept for prediction");
  trn->add_option("--temperature", ta.temperature, "posterior tempering");
  trn->callback([&] {
    ta.derive_seed = ta_master->count() > 0;
    rc = run_train(*trn, ta);
  });

  EvalArgs ea;
  CLI::App* ev = app.add_subcommand(
      "eval", "evaluate a checkpoint on a saved dataset and print a metrics row");
  ev->set_help_flag("--help", "print help");
  std::string cfg_dummy_ev;
  ev->add_option("--config", cfg_dummy_ev,
                 "key=value defaults; flags override (applied in a pre-pass)");
  ev->add_option("--model-file", ea.model_file, "checkpoint path")->required();
  ev->add_option("--data", ea.data,
                 "dataset path prefix (reads <prefix>.csv and <prefix>.meta)")
      ->required();
  ev->add_option("--risk-mc", ea.n_mc, "Monte-Carlo draws for the risk")
      ->capture_default_str();
  CLI::Option* ea_seed =
      ev->add_option("--risk-seed", ea.seed, "risk sampling seed")
          ->capture_default_str();
  CLI::Option* ea_master = ev->add_option(
      "--master-seed", ea.master_seed,
      "derive the risk seed from a suite master seed instead");
  ea_seed->excludes(ea_master);
  ea_master->excludes(ea_seed);
  ev->add_option("--out", ea.out, "also write the row to this CSV file");
  ev->callback([&] {
    ea.derive_seed = ea_master->count() > 0;
    rc = run_eval(ea);
  });

  SuiteArgs sa;
  CLI::App* rs = app.add_subcommand(
      "run-suite",
      "run a model-by-degree experiment suite and write metrics/timings CSVs");
  rs->set_help_flag("--help", "print help");
  std::string cfg_dummy_rs;
  rs->add_option("--config", cfg_dummy_rs,
                 "key=value defaults; flags override (applied in a pre-pass)");
  rs->add_option("--suite", sa.suite, "suite kind")
      ->required()
      ->check(CLI::IsMember({"regression", "classification"}));
  rs->add_option("--degrees", sa.degrees, "degree list (default: full grid)")
      ->delimiter(',');
  rs->add_option("--roster", sa.roster, "model list (default: full roster)")
      ->delimiter(',');
  rs->add_option("--n-train", sa.n_train, "training rows per degree")
      ->capture_default_str();
  rs->add_option("--n-test", sa.n_test, "test rows per degree")
      ->capture_default_str();
  rs->add_option("--risk-mc", sa.n_mc, "Monte-Carlo draws for the risk")
      ->capture_default_str();
  rs->add_option("--seed", sa.seed, "master seed")->capture_default_str();
  rs->add_option("--out", sa.out, "output directory")
      ->envname("MOEBENCH_OUT_DIR");
  rs->add_option("--moe-epochs", sa.moe_epochs, "override for every MoE cell");
  rs->add_option("--sghmc-burn-in", sa.sghmc_burn_in, "sampler burn-in epochs");
  rs->add_option("--sghmc-samples", sa.sghmc_samples,
                 "posterior samples to collect");
  rs->add_option("--vi-epochs", sa.vi_epochs, "variational fit epochs");
  rs->add_option("--vi-mc-samples", sa.vi_mc_samples,
                 "variational gradient draws per step");
  rs->callback([&] { rc = run_run_suite(*rs, sa); });

  VerifyArgs va;
  CLI::App* vp = app.add_subcommand(
      "verify-proposition",
      "check by exhaustive enumeration that n translated copies of a "
      "shattered set are jointly shattered by piecewise hypotheses");
  vp->set_help_flag("--help", "print help");
  std::string cfg_dummy_vp;
  vp->add_option("--config", cfg_dummy_vp,
                 "key=value defaults; flags override (applied in a pre-pass)");
  vp->add_option("--n", va.n, "number of translated copies")
      ->required()
      ->check(CLI::PositiveNumber);
  vp->add_option("--family", va.family, "classifier family")
      ->capture_default_str()
      ->check(CLI::IsMember({"affine-thresholds", "intervals", "constants"}));
  vp->callback([&] { rc = run_verify(va); });

  PlotArgs pa;
  CLI::App* pl = app.add_subcommand(
      "plot", "render an SVG line chart of one metric versus degree");
  pl->set_help_flag("--help", "print help");
  std::string cfg_dummy_pl;
  pl->add_option("--config", cfg_dummy_pl,
                 "key=value defaults; flags override (applied in a pre-pass)");
  pl->add_option("--metrics", pa.metrics, "metrics CSV path")->required();
  pl->add_option("--metric", pa.metric, "column to plot")
      ->capture_default_str()
      ->check(CLI::IsMember({"mse", "nll", "accuracy", "risk"}));
  pl->add_option("--out", pa.out,
                 "output SVG path (default <out-dir>/plot-<metric>.svg)");
  pl->callback([&] { rc = run_plot(pa); });

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    args = apply_config_file(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return rc;
}
