#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace segstitch {

using Rng = std::mt19937_64;

/// Derives an independent seed for a named sub-stream ("scene", "sample",
/// "community", ...) and an index within it. Same inputs, same seed, on every
/// platform.
std::uint64_t derive_seed(std::uint64_t root, std::string_view stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t root, std::string_view stream, std::uint64_t index = 0) {
  return Rng(derive_seed(root, stream, index));
}

/// Uniform double in [0, 1) built from the top 53 bits, independent of the
/// standard library's distribution implementation.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on uniform01, portable across libraries.
double standard_normal(Rng& rng);

/// Uniform integer in [lo, hi] inclusive.
std::int64_t uniform_int(Rng& rng, std::int64_t lo, std::int64_t hi);

}  // namespace segstitch
