#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "ifxo/errors.hpp"

namespace ifxo {

// Seeded generator with pinned draw algorithms. std::mt19937_64 output is
// specified by the standard; the distributions are not, so uniform draws are
// implemented here to keep results identical across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [0, high). high = 0 yields 0.
  double uniform(double high) { return uniform01() * high; }

  // Uniform integer in [0, bound) by rejection; bound must be positive.
  std::uint64_t below(std::uint64_t bound) {
    if (bound == 0) throw ArgumentError("Rng::below: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t draw;
    do {
      draw = engine_();
    } while (draw >= limit);
    return draw % bound;
  }

  // First `count` entries of a Fisher-Yates shuffle of {0,...,n-1}:
  // a uniform sample of `count` distinct indices.
  std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count) {
    if (count > n) throw ArgumentError("Rng::sample_indices: count > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(below(n - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(count);
    return pool;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ifxo
