#pragma once

#include <cstdint>
#include <random>

namespace sqrng::detail {

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Distinct streams derived from one user seed, so that e.g. photon draws and
// electronic noise never share a generator even when given the same seed.
enum class Stream : std::uint64_t { photons = 1, electronic = 2, calibration = 3 };

inline std::mt19937_64 make_engine(std::uint64_t seed, Stream stream) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(stream))));
}

} // namespace sqrng::detail
