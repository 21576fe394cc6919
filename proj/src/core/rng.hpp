#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ucs {

// Deterministic random stream. Every draw in the library goes through this
// wrapper so a 64-bit seed fully determines the run:
//  - uniforms are the top 53 bits of std::mt19937_64,
//  - normals come from the Box-Muller transform over those uniforms,
//  - bounded integers use rejection sampling (no modulo bias),
//  - permutations use a Fisher-Yates shuffle over bounded draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed), seed_hint_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; the second variate of each pair is
  // cached, so draws come in deterministic order.
  double normal();

  // Uniform integer in [0, n); n >= 1.
  std::uint64_t below(std::uint64_t n);

  // In-place uniform random permutation.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    if (v.size() < 2) return;
    for (std::size_t i = v.size() - 1; i > 0; --i) {
      std::size_t j = static_cast<std::size_t>(below(i + 1));
      std::swap(v[i], v[j]);
    }
  }

  // Independent child stream; see derive_seed.
  Rng fork(std::uint64_t stream) const;

  std::uint64_t state_seed_hint() const { return seed_hint_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_hint_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;

  friend std::uint64_t derive_seed(std::uint64_t, std::uint64_t,
                                   std::uint64_t, std::uint64_t);
};

// One SplitMix64 step.
std::uint64_t splitmix64(std::uint64_t& state);

// Child-seed derivation: hashes (master, a, b, c) through SplitMix64 so that
// distinct index tuples give statistically independent streams. Used for
// per-trial, per-seed and per-chain streams.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

}  // namespace ucs
