#include "moebench/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>
#include <vector>

namespace moebench {

namespace {

[[noreturn]] void fail(const std::string& path, std::size_t line,
                       const std::string& msg) {
  std::ostringstream os;
  os << path << " line " << line << ": " << msg;
  throw std::runtime_error(os.str());
}

// line-oriented reader tracking position for error messages
class Reader {
 public:
  Reader(const std::string& path) : path_(path), in_(path) {
    if (!in_) throw std::runtime_error("cannot open " + path);
  }

  bool next(std::string& out) {
    if (!std::getline(in_, out)) return false;
    if (!out.empty() && out.back() == '\r') out.pop_back();
    ++line_;
    return true;
  }

  std::string require(const std::string& what) {
    std::string s;
    if (!next(s)) {
      fail(path_, line_ + 1, "unexpected end of file, expected " + what);
    }
    return s;
  }

  [[noreturn]] void error(const std::string& msg) const {
    fail(path_, line_, msg);
  }

  const std::string& path() const { return path_; }
  std::size_t line() const { return line_; }

 private:
  std::string path_;
  std::ifstream in_;
  std::size_t line_ = 0;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

struct KeyValue {
  std::string key;
  std::string value;
};

KeyValue parse_kv(Reader& r, const std::string& line) {
  const std::size_t eq = line.find('=');
  if (eq == std::string::npos) {
    r.error("expected key=value, got '" + line + "'");
  }
  return {line.substr(0, eq), line.substr(eq + 1)};
}

double parse_double_or(Reader& r, const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    r.error("malformed number '" + s + "'");
  }
  return v;
}

std::uint64_t parse_u64(Reader& r, const std::string& s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    r.error("malformed integer '" + s + "'");
  }
  return v;
}

Vector parse_row(Reader& r, const std::string& line, std::size_t want) {
  const std::vector<std::string> parts = split(line, ' ');
  if (parts.size() != want) {
    std::ostringstream os;
    os << "expected " << want << " values, got " << parts.size();
    r.error(os.str());
  }
  Vector row(want);
  for (std::size_t i = 0; i < want; ++i) {
    row[i] = parse_double_or(r, parts[i]);
  }
  return row;
}

void expect_block(Reader& r, const std::string& name) {
  const std::string line = r.require("block '" + name + "'");
  if (line != name) {
    r.error("expected block '" + name + "', got '" + line + "'");
  }
}

Matrix read_matrix_block(Reader& r, const std::string& name, std::size_t rows,
                         std::size_t cols) {
  expect_block(r, name);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    const Vector row = parse_row(r, r.require("matrix row"), cols);
    std::copy(row.begin(), row.end(), m.row(i));
  }
  return m;
}

void write_row(std::ostream& os, const double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) os << ' ';
    os << format_double(v[i]);
  }
  os << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

// header parsing shared by the checkpoint loaders: reads key=value lines in
// the given order, rejecting unknown and out-of-order keys by name
std::vector<std::string> read_header(Reader& r,
                                     const std::vector<std::string>& keys) {
  std::vector<std::string> values;
  values.reserve(keys.size());
  for (const std::string& key : keys) {
    const KeyValue kv = parse_kv(r, r.require("header key " + key));
    if (kv.key != key) {
      r.error("unknown or misplaced header key '" + kv.key + "', expected '" +
              key + "'");
    }
    values.push_back(kv.value);
  }
  return values;
}

std::string link_name(LinkKind link) {
  return link == LinkKind::Identity ? "identity" : "logistic";
}

LinkKind parse_link(Reader& r, const std::string& s) {
  if (s == "identity") return LinkKind::Identity;
  if (s == "logistic") return LinkKind::Logistic;
  r.error("unknown link '" + s + "'");
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return std::string(buf, ptr);
}

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw std::invalid_argument("malformed number '" + std::string(s) + "'");
  }
  return v;
}

void save_dataset(const Dataset& ds, const std::string& csv_path,
                  const std::string& meta_path) {
  std::ofstream csv = open_out(csv_path);
  for (std::size_t j = 0; j < ds.x.cols; ++j) csv << 'x' << j << ',';
  csv << "y\n";
  for (std::size_t i = 0; i < ds.x.rows; ++i) {
    for (std::size_t j = 0; j < ds.x.cols; ++j) {
      csv << format_double(ds.x(i, j)) << ',';
    }
    csv << format_double(ds.y[i]) << '\n';
  }

  const GeneratorSpec& spec = ds.spec;
  std::ofstream meta = open_out(meta_path);
  meta << "kind="
       << (spec.kind == TaskKind::Regression ? "regression" : "classification")
       << '\n';
  meta << "degree=" << spec.degree << '\n';
  meta << "seed=" << spec.seed << '\n';
  meta << "coeffs=";
  for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
    if (i > 0) meta << ' ';
    meta << format_double(spec.coeffs[i]);
  }
  meta << '\n';
  meta << "x_lo=" << format_double(spec.x_lo) << '\n';
  meta << "x_hi=" << format_double(spec.x_hi) << '\n';
  meta << "noise_std=" << format_double(spec.noise_std) << '\n';
  meta << "feature_means=";
  for (std::size_t i = 0; i < spec.feature_stats.size(); ++i) {
    if (i > 0) meta << ' ';
    meta << format_double(spec.feature_stats[i].mean);
  }
  meta << '\n';
  meta << "feature_stds=";
  for (std::size_t i = 0; i < spec.feature_stats.size(); ++i) {
    if (i > 0) meta << ' ';
    meta << format_double(spec.feature_stats[i].std);
  }
  meta << '\n';
  meta << "target_mean=" << format_double(spec.target_stats.mean) << '\n';
  meta << "target_std=" << format_double(spec.target_stats.std) << '\n';
}

Dataset load_dataset(const std::string& csv_path,
                     const std::string& meta_path) {
  Dataset ds;
  {
    Reader r(meta_path);
    const std::vector<std::string> vals = read_header(
        r, {"kind", "degree", "seed", "coeffs", "x_lo", "x_hi", "noise_std",
            "feature_means", "feature_stds", "target_mean", "target_std"});
    GeneratorSpec& spec = ds.spec;
    if (vals[0] == "regression") {
      spec.kind = TaskKind::Regression;
    } else if (vals[0] == "classification") {
      spec.kind = TaskKind::Classification;
    } else {
      r.error("unknown kind '" + vals[0] + "'");
    }
    spec.degree = static_cast<int>(parse_u64(r, vals[1]));
    spec.seed = parse_u64(r, vals[2]);
    for (const std::string& c : split(vals[3], ' ')) {
      spec.coeffs.push_back(parse_double_or(r, c));
    }
    spec.x_lo = parse_double_or(r, vals[4]);
    spec.x_hi = parse_double_or(r, vals[5]);
    spec.noise_std = parse_double_or(r, vals[6]);
    const std::vector<std::string> means = split(vals[7], ' ');
    const std::vector<std::string> stds = split(vals[8], ' ');
    if (means.size() != stds.size()) {
      r.error("feature means/stds length mismatch");
    }
    for (std::size_t i = 0; i < means.size(); ++i) {
      ds.spec.feature_stats.push_back({parse_double_or(r, means[i]),
                                       parse_double_or(r, stds[i])});
    }
    spec.target_stats.mean = parse_double_or(r, vals[9]);
    spec.target_stats.std = parse_double_or(r, vals[10]);
  }

  Reader r(csv_path);
  const std::string header = r.require("csv header");
  const std::vector<std::string> cols = split(header, ',');
  if (cols.size() < 2 || cols.back() != "y") {
    r.error("expected header x0,...,y");
  }
  const std::size_t d = cols.size() - 1;
  for (std::size_t j = 0; j < d; ++j) {
    const std::string want = "x" + std::to_string(j);
    if (cols[j] != want) {
      r.error("expected column '" + want + "', got '" + cols[j] + "'");
    }
  }

  std::vector<Vector> rows;
  std::string line;
  while (r.next(line)) {
    if (line.empty()) continue;
    const std::vector<std::string> parts = split(line, ',');
    if (parts.size() != d + 1) {
      std::ostringstream os;
      os << "expected " << d + 1 << " fields, got " << parts.size();
      r.error(os.str());
    }
    Vector row(d + 1);
    for (std::size_t j = 0; j <= d; ++j) {
      row[j] = parse_double_or(r, parts[j]);
      if (!std::isfinite(row[j])) r.error("non-finite value");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) r.error("dataset has no rows");

  ds.x = Matrix(rows.size(), d);
  ds.y.resize(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].begin() + d, ds.x.row(i));
    ds.y[i] = rows[i][d];
  }
  return ds;
}

void save_moe(const MoeModel& m, const std::string& path) {
  if (m.experts.empty()) throw std::invalid_argument("save_moe: no experts");
  std::ofstream out = open_out(path);
  const std::size_t d = m.gating.w_g.cols;
  out << "kind=moe\n";
  out << "n_experts=" << m.experts.size() << '\n';
  out << "k=" << m.gating.k << '\n';
  out << "d=" << d << '\n';
  out << "link=" << link_name(m.experts.front().link) << '\n';
  out << "sigma=" << format_double(m.experts.front().noise_std) << '\n';
  out << "W_g\n";
  for (std::size_t i = 0; i < m.gating.w_g.rows; ++i) {
    write_row(out, m.gating.w_g.row(i), d);
  }
  out << "W_noise\n";
  for (std::size_t i = 0; i < m.gating.w_noise.rows; ++i) {
    write_row(out, m.gating.w_noise.row(i), d);
  }
  for (std::size_t e = 0; e < m.experts.size(); ++e) {
    out << "theta_" << e << '\n';
    write_row(out, m.experts[e].theta.data(), d);
  }
}

MoeModel load_moe(const std::string& path) {
  Reader r(path);
  const std::vector<std::string> vals =
      read_header(r, {"kind", "n_experts", "k", "d", "link", "sigma"});
  if (vals[0] != "moe") r.error("expected kind=moe, got '" + vals[0] + "'");
  const std::size_t n_experts = parse_u64(r, vals[1]);
  const std::size_t k = parse_u64(r, vals[2]);
  const std::size_t d = parse_u64(r, vals[3]);
  const LinkKind link = parse_link(r, vals[4]);
  const double sigma = parse_double_or(r, vals[5]);
  if (n_experts == 0 || d == 0 || k < 1 || k > n_experts) {
    r.error("invalid shape header");
  }

  MoeModel m;
  m.gating.k = k;
  m.gating.w_g = read_matrix_block(r, "W_g", n_experts, d);
  m.gating.w_noise = read_matrix_block(r, "W_noise", n_experts, d);
  m.experts.resize(n_experts);
  for (std::size_t e = 0; e < n_experts; ++e) {
    std::ostringstream name;
    name << "theta_" << e;
    expect_block(r, name.str());
    m.experts[e].theta = parse_row(r, r.require("theta row"), d);
    m.experts[e].link = link;
    m.experts[e].noise_std = sigma;
  }
  return m;
}

void save_blr(const GaussianPosterior& p, const std::string& path) {
  std::ofstream out = open_out(path);
  const std::size_t d = p.mu.size();
  out << "kind=blr_posterior\n";
  out << "d=" << d << '\n';
  out << "sigma=" << format_double(p.noise_std) << '\n';
  out << "mu\n";
  write_row(out, p.mu.data(), d);
  out << "Sigma\n";
  for (std::size_t i = 0; i < d; ++i) write_row(out, p.sigma.row(i), d);
}

GaussianPosterior load_blr(const std::string& path) {
  Reader r(path);
  const std::vector<std::string> vals = read_header(r, {"kind", "d", "sigma"});
  if (vals[0] != "blr_posterior") {
    r.error("expected kind=blr_posterior, got '" + vals[0] + "'");
  }
  const std::size_t d = parse_u64(r, vals[1]);
  if (d == 0) r.error("invalid dimension");
  GaussianPosterior p;
  p.noise_std = parse_double_or(r, vals[2]);
  expect_block(r, "mu");
  p.mu = parse_row(r, r.require("mu row"), d);
  p.sigma = read_matrix_block(r, "Sigma", d, d);
  return p;
}

void save_samples(const PosteriorSamples& s, const std::string& path) {
  if (s.thetas.empty()) throw std::invalid_argument("save_samples: empty");
  std::ofstream out = open_out(path);
  const std::size_t d = s.thetas.front().size();
  out << "kind=posterior_samples\n";
  out << "provenance=" << (s.provenance == SamplerKind::Sghmc ? "sghmc" : "vi")
      << '\n';
  out << "n_samples=" << s.thetas.size() << '\n';
  out << "d=" << d << '\n';
  out << "seed=" << s.seed << '\n';
  out << "theta\n";
  for (const Vector& theta : s.thetas) write_row(out, theta.data(), d);
}

PosteriorSamples load_samples(const std::string& path) {
  Reader r(path);
  const std::vector<std::string> vals =
      read_header(r, {"kind", "provenance", "n_samples", "d", "seed"});
  if (vals[0] != "posterior_samples") {
    r.error("expected kind=posterior_samples, got '" + vals[0] + "'");
  }
  PosteriorSamples s;
  if (vals[1] == "sghmc") {
    s.provenance = SamplerKind::Sghmc;
  } else if (vals[1] == "vi") {
    s.provenance = SamplerKind::Vi;
  } else {
    r.error("unknown provenance '" + vals[1] + "'");
  }
  const std::size_t n = parse_u64(r, vals[2]);
  const std::size_t d = parse_u64(r, vals[3]);
  if (n == 0 || d == 0) r.error("invalid shape header");
  s.seed = parse_u64(r, vals[4]);
  expect_block(r, "theta");
  s.thetas.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.thetas.push_back(parse_row(r, r.require("theta row"), d));
  }
  return s;
}

CheckpointKind peek_checkpoint_kind(const std::string& path) {
  Reader r(path);
  const KeyValue kv = parse_kv(r, r.require("kind header"));
  if (kv.key != "kind") r.error("first line must be kind=...");
  if (kv.value == "moe") return CheckpointKind::Moe;
  if (kv.value == "blr_posterior") return CheckpointKind::BlrPosterior;
  if (kv.value == "posterior_samples") return CheckpointKind::PosteriorSamples;
  r.error("unknown checkpoint kind '" + kv.value + "'");
}

std::string metrics_csv_header() {
  return "model,degree,mse,nll,accuracy,risk,seconds,seed";
}

std::string metrics_csv_row(const MetricsRecord& r) {
  std::ostringstream os;
  const auto field = [&os](const std::optional<double>& v) {
    os << ',';
    if (v) os << format_double(*v);
  };
  os << r.model << ',' << r.degree;
  field(r.mse);
  field(r.nll);
  field(r.accuracy);
  field(r.risk);
  field(r.seconds);
  os << ',' << r.seed;
  return os.str();
}

}  // namespace moebench
