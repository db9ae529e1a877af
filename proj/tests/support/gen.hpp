#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace testgen {

// SplitMix64; every property test takes its own seed so failures replay.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : s_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (s_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin() { return (next() & 1U) != 0; }

 private:
  std::uint64_t s_;
};

// Mesh-free oracles on plain vectors.
inline double dist(const std::vector<double>& a, const std::vector<double>& b, int kind) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    if (kind == 0) acc += d * d;
    else if (kind == 1) acc = std::max(acc, d);
    else acc += d;
  }
  return kind == 0 ? std::sqrt(acc) : acc;
}

}  // namespace testgen
