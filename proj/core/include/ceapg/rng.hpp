#pragma once

#include <cstdint>
#include <random>

namespace ceapg {

// All randomness in a run flows from one 64-bit master seed. Child streams
// are derived by counter, never by sharing generator state, so the tree
//   master -> per-trial -> per-generation -> per-candidate -> per-rollout
// is independent of scheduling and worker count.

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t counter) {
  return mix64(parent ^ mix64(counter + 0x632BE59BD9B4E019ull));
}

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(mix64(seed));
}

}  // namespace ceapg
