#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace automsc {

/// Uniform integer in [0, bound) by rejection sampling, so results depend
/// only on the mt19937_64 stream and not on the standard library's
/// distribution implementation.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

/// Fisher-Yates shuffle with a portable draw sequence.
template <typename T>
void portable_shuffle(std::span<T> items, std::mt19937_64& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace automsc
