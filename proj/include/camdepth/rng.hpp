#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace camdepth {

// Deterministic random stream. Wraps mt19937_64 with fixed draw algorithms so
// sequences do not depend on the standard library's distribution choices.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n >= 1.
  std::uint64_t uniform_index(std::uint64_t n);

  // Standard normal via Box-Muller (one value per call, no caching).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
};

// Pure function of (seed, index, tag): distinct indices or tags give
// independent streams, reproducible across runs and iteration order.
Rng derive_rng(std::uint64_t global_seed, std::uint64_t sample_index, const std::string& stage_tag);

}  // namespace camdepth
