#pragma once

#include <cstdint>
#include <cstring>
#include <random>
#include <span>

namespace posekit {

/// splitmix64 step; used to derive independent per-trial seed streams.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Deterministic child seed: independent of evaluation order.
inline uint64_t derive_seed(uint64_t master, uint64_t index) {
  uint64_t state = master ^ (0x9e3779b97f4a7c15ULL * (index + 1));
  return splitmix64(state);
}

inline uint64_t fnv1a64(std::span<const unsigned char> bytes,
                        uint64_t seed = 0xcbf29ce484222325ULL) {
  uint64_t hash = seed;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline void hash_append(uint64_t* hash, const void* data, size_t size) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  *hash = fnv1a64({bytes, size}, *hash);
}

inline void hash_append(uint64_t* hash, double value) {
  hash_append(hash, &value, sizeof(value));
}

inline std::mt19937_64 make_engine(uint64_t seed) {
  return std::mt19937_64(seed);
}

}  // namespace posekit
