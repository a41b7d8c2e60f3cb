#include "moebench/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace moebench {

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t master, std::string_view label,
                       std::uint64_t index) {
  std::uint64_t h = splitmix64(master ^ fnv1a64(label));
  return splitmix64(h + index);
}

double Rng::normal() {
  // 1 - u keeps the log argument in (0, 1]
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  return r * std::cos(2.0 * std::numbers::pi * u2);
}

std::size_t Rng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("index: n must be positive");
  return static_cast<std::size_t>(next_u64() % n);
}

std::vector<double> sample_standard_normal(Rng& rng, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = rng.normal();
  return out;
}

}  // namespace moebench
