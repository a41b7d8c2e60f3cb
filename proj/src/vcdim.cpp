#include "moebench/vcdim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "moebench/rng.hpp"

namespace moebench {

namespace {

constexpr std::size_t kPointCap = 22;

// candidate boundary positions: left of everything, midpoints, right of
// everything
std::vector<double> boundary_grid(const PointSet& pts) {
  std::vector<double> grid;
  grid.reserve(pts.size() + 1);
  grid.push_back(pts.front() - 1.0);
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    grid.push_back(0.5 * (pts[i] + pts[i + 1]));
  }
  grid.push_back(pts.back() + 1.0);
  return grid;
}

}  // namespace

void validate_point_set(const PointSet& pts) {
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    if (!(pts[i] < pts[i + 1])) {
      throw std::invalid_argument("point set must be strictly increasing");
    }
  }
}

ClassifierPtr AffineThreshold::translated(double c) const {
  // a(x - c) + b = a x + (b - a c)
  return std::make_shared<AffineThreshold>(a, b - a * c);
}

std::string AffineThreshold::describe() const {
  std::ostringstream os;
  os << "1[" << a << "*x + " << b << " >= 0]";
  return os.str();
}

ClassifierPtr IntervalIndicator::translated(double c) const {
  return std::make_shared<IntervalIndicator>(lo + c, hi + c);
}

std::string IntervalIndicator::describe() const {
  std::ostringstream os;
  os << "1[" << lo << " <= x <= " << hi << "]";
  return os.str();
}

ClassifierPtr ClassifierFamily::find_realizer(
    const PointSet& pts, const std::vector<int>& labels) const {
  if (pts.size() != labels.size()) {
    throw std::invalid_argument("find_realizer: label count mismatch");
  }
  validate_point_set(pts);
  for (const ClassifierPtr& c : candidates(pts)) {
    bool match = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (c->classify(pts[i]) != labels[i]) {
        match = false;
        break;
      }
    }
    if (match) return c;
  }
  return nullptr;
}

std::vector<ClassifierPtr> AffineThresholdFamily::candidates(
    const PointSet& pts) const {
  std::vector<ClassifierPtr> out;
  if (pts.empty()) {
    out.push_back(std::make_shared<AffineThreshold>(1.0, 0.0));
    return out;
  }
  for (const double t : boundary_grid(pts)) {
    // x >= t and x <= t
    out.push_back(std::make_shared<AffineThreshold>(1.0, -t));
    out.push_back(std::make_shared<AffineThreshold>(-1.0, t));
  }
  return out;
}

std::vector<ClassifierPtr> IntervalFamily::candidates(
    const PointSet& pts) const {
  std::vector<ClassifierPtr> out;
  // empty indicator realizes the all-zero labeling
  out.push_back(std::make_shared<IntervalIndicator>(1.0, -1.0));
  if (pts.empty()) return out;
  const std::vector<double> grid = boundary_grid(pts);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      out.push_back(std::make_shared<IntervalIndicator>(grid[i], grid[j]));
    }
  }
  return out;
}

namespace {

struct ConstantClassifier final : Classifier1D {
  int value;
  explicit ConstantClassifier(int v) : value(v) {}
  int classify(double) const override { return value; }
  ClassifierPtr translated(double) const override {
    return std::make_shared<ConstantClassifier>(value);
  }
  std::string describe() const override {
    return value == 1 ? "always-1" : "always-0";
  }
};

}  // namespace

std::vector<ClassifierPtr> ConstantFamily::candidates(const PointSet&) const {
  return {std::make_shared<ConstantClassifier>(0),
          std::make_shared<ConstantClassifier>(1)};
}

bool shatters(const ClassifierFamily& family, const PointSet& pts) {
  validate_point_set(pts);
  if (pts.size() > kPointCap) {
    throw std::invalid_argument("shatters: point set exceeds the 2^22 cap");
  }
  const std::uint64_t n_labelings = std::uint64_t{1} << pts.size();
  std::vector<int> labels(pts.size());
  for (std::uint64_t bits = 0; bits < n_labelings; ++bits) {
    for (std::size_t i = 0; i < pts.size(); ++i) {
      labels[i] = static_cast<int>((bits >> i) & 1u);
    }
    if (family.find_realizer(pts, labels) == nullptr) return false;
  }
  return true;
}

VcdResult vcd_lower_bound(const ClassifierFamily& family, std::size_t max_m,
                          std::size_t search_budget, std::uint64_t seed) {
  if (max_m > kPointCap) {
    throw std::invalid_argument("vcd_lower_bound: max_m exceeds the cap");
  }
  Rng rng(mix_seed(seed, "vcd-search"));
  for (std::size_t m = max_m; m >= 1; --m) {
    // structured candidate first: small integers
    PointSet structured(m);
    for (std::size_t i = 0; i < m; ++i) structured[i] = static_cast<double>(i);
    if (shatters(family, structured)) return {m, structured};
    for (std::size_t trial = 0; trial < search_budget; ++trial) {
      PointSet pts(m);
      for (double& p : pts) p = rng.uniform(-10.0, 10.0);
      std::sort(pts.begin(), pts.end());
      bool distinct = true;
      for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (pts[i] == pts[i + 1]) distinct = false;
      }
      if (!distinct) continue;
      if (shatters(family, pts)) return {m, pts};
    }
  }
  return {0, {}};
}

TranslatedSets build_translated_sets(const PointSet& x1, std::size_t n) {
  if (x1.empty()) throw std::invalid_argument("build_translated_sets: empty base set");
  if (n == 0) throw std::invalid_argument("build_translated_sets: n must be >= 1");
  validate_point_set(x1);

  TranslatedSets out;
  out.step = x1.back() - x1.front() + 1.0;
  out.sets.push_back(x1);
  out.offsets.push_back(0.0);

  for (std::size_t i = 1; i < n; ++i) {
    const PointSet& prev = out.sets.back();
    // smallest positive multiple of step whose translate of the previous set
    // avoids every earlier set
    for (std::size_t mult = 1;; ++mult) {
      const double c = static_cast<double>(mult) * out.step;
      PointSet candidate(prev.size());
      for (std::size_t j = 0; j < prev.size(); ++j) {
        candidate[j] = prev[j] + c;
      }
      bool clear = true;
      for (const PointSet& earlier : out.sets) {
        for (const double p : candidate) {
          if (p >= earlier.front() && p <= earlier.back()) clear = false;
        }
      }
      if (clear) {
        out.offsets.push_back(out.offsets.back() + c);
        out.sets.push_back(std::move(candidate));
        break;
      }
    }
  }
  return out;
}

PiecewiseHypothesis build_piecewise_hypothesis(
    const TranslatedSets& sets, const std::vector<int>& labels,
    const ClassifierFamily& family) {
  const std::size_t n = sets.sets.size();
  std::size_t total = 0;
  for (const PointSet& s : sets.sets) total += s.size();
  if (labels.size() != total) {
    throw std::invalid_argument(
        "build_piecewise_hypothesis: labeling length mismatch");
  }

  const PointSet& x1 = sets.sets.front();
  PiecewiseHypothesis h;
  std::size_t cursor = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::vector<int> block(labels.begin() + cursor,
                                 labels.begin() + cursor + x1.size());
    cursor += x1.size();
    // untranslate: the block must be realizable on the base set
    const ClassifierPtr base = family.find_realizer(x1, block);
    if (base == nullptr) {
      throw std::runtime_error(
          "build_piecewise_hypothesis: block not realizable on the base set");
    }
    const ClassifierPtr shifted = base->translated(sets.offsets[j]);
    h.experts.push_back(
        [shifted](double x) { return shifted->classify(x); });
    h.cells.push_back(PiecewiseCell{
        {{sets.sets[j].front() - 0.5, sets.sets[j].back() + 0.5}}});
  }
  return h;
}

PropositionReport verify_proposition(std::size_t n,
                                     const ClassifierFamily& family) {
  if (n == 0) throw std::invalid_argument("verify_proposition: n must be >= 1");
  const VcdResult base = vcd_lower_bound(family, 4);
  if (base.vcd == 0) {
    throw std::runtime_error("verify_proposition: no shattered set found");
  }

  PropositionReport report;
  report.n = n;
  report.m = base.vcd;
  report.points = n * base.vcd;
  report.witness = base.witness;
  if (report.points > kPointCap) {
    throw std::invalid_argument("verify_proposition: n*m exceeds the cap");
  }

  const TranslatedSets sets = build_translated_sets(base.witness, n);
  PointSet all_points;
  for (const PointSet& s : sets.sets) {
    all_points.insert(all_points.end(), s.begin(), s.end());
  }

  const std::uint64_t n_labelings = std::uint64_t{1} << report.points;
  std::vector<int> labels(report.points);
  for (std::uint64_t bits = 0; bits < n_labelings; ++bits) {
    for (std::size_t i = 0; i < report.points; ++i) {
      labels[i] = static_cast<int>((bits >> i) & 1u);
    }
    const PiecewiseHypothesis h =
        build_piecewise_hypothesis(sets, labels, family);
    for (std::size_t i = 0; i < all_points.size(); ++i) {
      if (piecewise_classify(h, all_points[i]) != labels[i]) {
        std::ostringstream os;
        os << "labeling " << bits << " mismatched at point " << all_points[i];
        report.failure = os.str();
        report.labelings_checked = bits + 1;
        report.ok = false;
        return report;
      }
    }
  }
  report.labelings_checked = n_labelings;
  report.ok = true;
  return report;
}

}  // namespace moebench
