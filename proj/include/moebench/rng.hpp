#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

// Deterministic random numbers. Every stochastic component takes an explicit
// seed; independent streams are derived by hashing a label (and optional
// index) into the parent seed rather than by sharing engine state, so the
// stream a component sees depends only on its seed and label path, not on how
// much randomness anything else consumed.
namespace moebench {

// Stable across platforms: used for seed derivation, so the mixing must not
// depend on std:: hash implementations.
std::uint64_t fnv1a64(std::string_view s);
std::uint64_t splitmix64(std::uint64_t x);

// Child seed for (master, label, index). mix_seed(m, l) == mix_seed(m, l, 0).
std::uint64_t mix_seed(std::uint64_t master, std::string_view label,
                       std::uint64_t index = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Derived generator; independent of this generator's consumed state.
  Rng fork(std::string_view label, std::uint64_t index = 0) const {
    return Rng(mix_seed(seed_, label, index));
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; one draw consumes two uniforms.
  double normal() ;

  // Uniform on {0, ..., n-1}; n must be positive.
  std::size_t index(std::size_t n);

  // Fisher-Yates, identical order on every platform.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

// n independent standard normal draws; n == 0 gives an empty vector.
std::vector<double> sample_standard_normal(Rng& rng, std::size_t n);

}  // namespace moebench
