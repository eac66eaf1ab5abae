#pragma once

#include <cstdint>
#include <random>

namespace potx {

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Child seed for a named sub-stream. Same inputs give the same child on
// every platform.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept;

// Child seed keyed by a probability level (uses its IEEE-754 bit pattern).
std::uint64_t derive_seed_for_level(std::uint64_t base, double level) noexcept;

// Portable random source. std::*_distribution output is implementation
// defined, so all variates are produced here from raw mt19937_64 words.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix64(seed)) {}

  // Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard exponential (mean 1).
  double exponential() noexcept;

  // Uniform integer in [0, n), n > 0, without modulo bias.
  std::uint64_t below(std::uint64_t n) noexcept;

  std::uint64_t next() noexcept { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace potx
