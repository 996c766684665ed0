#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace nescodes {

using RandomEngine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derives an independent stream seed from a master seed and a key path,
/// e.g. (master, iteration, sample). Streams for distinct keys do not depend
/// on evaluation order, so worker count never changes results.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> keys) noexcept {
  std::uint64_t h = splitmix64(master);
  for (auto k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline RandomEngine make_stream(std::uint64_t master,
                                std::initializer_list<std::uint64_t> keys) {
  return RandomEngine(derive_seed(master, keys));
}

}  // namespace nescodes
