#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "moebench/moe.hpp"

// Shattering machinery over the reals: exhaustive-search classifier families,
// a brute-force shattering check, and the constructive lower-bound argument
// that glues n translated copies of a shattered base set into one piecewise
// hypothesis per labeling. Everything here is exact enumeration, capped so
// 2^points stays tractable.
namespace moebench {

// strictly increasing, finite
using PointSet = std::vector<double>;

void validate_point_set(const PointSet& pts);

struct Classifier1D {
  virtual ~Classifier1D() = default;
  virtual int classify(double x) const = 0;
  // member g with g(x) = this(x - c); families used here are closed under
  // translation, so g belongs to the same family
  virtual std::shared_ptr<const Classifier1D> translated(double c) const = 0;
  virtual std::string describe() const = 0;
};

using ClassifierPtr = std::shared_ptr<const Classifier1D>;

// label = 1 iff a*x + b >= 0, with a in {-1, +1}
struct AffineThreshold final : Classifier1D {
  double a;
  double b;
  AffineThreshold(double a_, double b_) : a(a_), b(b_) {}
  int classify(double x) const override { return a * x + b >= 0.0 ? 1 : 0; }
  ClassifierPtr translated(double c) const override;
  std::string describe() const override;
};

// label = 1 iff lo <= x <= hi; lo > hi encodes the empty indicator
struct IntervalIndicator final : Classifier1D {
  double lo;
  double hi;
  IntervalIndicator(double lo_, double hi_) : lo(lo_), hi(hi_) {}
  int classify(double x) const override {
    return (x >= lo && x <= hi) ? 1 : 0;
  }
  ClassifierPtr translated(double c) const override;
  std::string describe() const override;
};

class ClassifierFamily {
 public:
  virtual ~ClassifierFamily() = default;
  virtual std::string name() const = 0;
  // Exhaustive relative to pts: if any family member realizes a labeling on
  // pts, so does one of the returned candidates.
  virtual std::vector<ClassifierPtr> candidates(const PointSet& pts) const = 0;

  // First candidate matching the labeling (labels[i] for pts[i]), or null.
  ClassifierPtr find_realizer(const PointSet& pts,
                              const std::vector<int>& labels) const;
};

// sign thresholds in both directions, boundaries searched at midpoints and
// outside the extremes
class AffineThresholdFamily final : public ClassifierFamily {
 public:
  std::string name() const override { return "affine-thresholds"; }
  std::vector<ClassifierPtr> candidates(const PointSet& pts) const override;
};

// closed-interval indicators with endpoints from the midpoint grid
class IntervalFamily final : public ClassifierFamily {
 public:
  std::string name() const override { return "intervals"; }
  std::vector<ClassifierPtr> candidates(const PointSet& pts) const override;
};

// the two constant functions; capacity 1
class ConstantFamily final : public ClassifierFamily {
 public:
  std::string name() const override { return "constants"; }
  std::vector<ClassifierPtr> candidates(const PointSet& pts) const override;
};

// True iff every one of the 2^|pts| labelings is realized. |pts| <= 22.
bool shatters(const ClassifierFamily& family, const PointSet& pts);

struct VcdResult {
  std::size_t vcd = 0;
  PointSet witness;  // shattered set of that size; empty when vcd == 0
};

// Largest m <= max_m with a shattered point set found among structured
// (small integers) and seeded random candidate sets; a lower bound by
// construction.
VcdResult vcd_lower_bound(const ClassifierFamily& family, std::size_t max_m,
                          std::size_t search_budget = 50,
                          std::uint64_t seed = 0);

struct TranslatedSets {
  std::vector<PointSet> sets;   // n pairwise-disjoint translates, first = X1
  std::vector<double> offsets;  // absolute shift of each set from X1
  double step;                  // span(X1) + 1
};

// Set i is set i-1 shifted by the smallest positive multiple of step that
// avoids every earlier set (which is always one step, giving consecutive
// gaps of exactly 1 between sets).
TranslatedSets build_translated_sets(const PointSet& x1, std::size_t n);

// One binary label per construction point, ordered set-by-set then
// point-by-point. Each block is realized on X1 by untranslating; the block's
// classifier is re-translated into its cell, cells being half-open interval
// covers [min-0.5, max+0.5) with the last cell the catch-all. Throws if the
// family cannot realize a block on X1.
PiecewiseHypothesis build_piecewise_hypothesis(const TranslatedSets& sets,
                                               const std::vector<int>& labels,
                                               const ClassifierFamily& family);

struct PropositionReport {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t points = 0;  // n*m
  std::uint64_t labelings_checked = 0;
  bool ok = false;
  PointSet witness;     // the shattered base set
  std::string failure;  // description of the first unrealized labeling
};

// Executable capacity check: with m the found lower bound of the family,
// builds n translated sets and confirms all 2^{n*m} labelings of the n*m
// construction points are realized by piecewise hypotheses. n*m <= 22.
PropositionReport verify_proposition(std::size_t n,
                                     const ClassifierFamily& family);

}  // namespace moebench
