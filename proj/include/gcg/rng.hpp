#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gcg {

// Deterministic RNG: mt19937_64 core with hand-rolled distributions so that
// streams do not depend on the standard library's distribution internals.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(uniform01() * n); }

  int64_t uniform_int64(int64_t n) { return static_cast<int64_t>(uniform01() * static_cast<double>(n)); }

  bool bernoulli(double p) { return uniform01() < p; }

  // Box-Muller; caches the second variate.
  double normal(double mu = 0.0, double sigma = 1.0) {
    if (has_spare_) {
      has_spare_ = false;
      return mu + sigma * spare_;
    }
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double z0 = r * std::cos(2.0 * M_PI * u2);
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return mu + sigma * z0;
  }

  // Derive an independent stream, e.g. one per worker.
  Rng split(uint64_t salt) { return Rng(next_u64() ^ (salt * 0x9e3779b97f4a7c15ULL)); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gcg
