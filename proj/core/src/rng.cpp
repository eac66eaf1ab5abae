#include "potx/rng.hpp"

#include <bit>
#include <cmath>

namespace potx {
namespace {
__extension__ typedef unsigned __int128 u128;
}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) noexcept {
  return mix64(mix64(base) ^ mix64(tag + 0x632be59bd9b4e019ULL));
}

std::uint64_t derive_seed_for_level(std::uint64_t base, double level) noexcept {
  return derive_seed(base, std::bit_cast<std::uint64_t>(level));
}

double Rng::exponential() noexcept { return -std::log1p(-uniform()); }

std::uint64_t Rng::below(std::uint64_t n) noexcept {
  // Lemire's nearly-divisionless method.
  u128 m = static_cast<u128>(engine_()) * n;
  auto low = static_cast<std::uint64_t>(m);
  if (low < n) {
    const std::uint64_t threshold = (0 - n) % n;
    while (low < threshold) {
      m = static_cast<u128>(engine_()) * n;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

}  // namespace potx
