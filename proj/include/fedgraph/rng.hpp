#pragma once

#include <cstdint>
#include <random>

namespace fedgraph {

using Rng = std::mt19937_64;

// splitmix64 finalizer. Used to derive statistically independent child seeds
// from a master seed plus a stream index, so that e.g. (round, client) pairs
// get reproducible streams regardless of sampling order.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  return mix64(master ^ mix64(stream));
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                 std::uint64_t b) {
  return derive_seed(derive_seed(master, a), b);
}

}  // namespace fedgraph
