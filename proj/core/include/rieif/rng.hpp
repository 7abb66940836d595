#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace rieif {

using Rng = std::mt19937_64;

/// Mixes a 64-bit value (SplitMix64 finaliser).
std::uint64_t mix64(std::uint64_t x);

/// 64-bit FNV-1a of a byte string. Stable across platforms.
std::uint64_t fnv1a(std::string_view bytes);

/// Seed for a named sub-stream ("data", "mask", "init", "noise", ...) of a run seed,
/// optionally further split by integer indices.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream, std::uint64_t a = 0, std::uint64_t b = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view stream, std::uint64_t a = 0, std::uint64_t b = 0) {
  return Rng(derive_seed(seed, stream, a, b));
}

}  // namespace rieif
