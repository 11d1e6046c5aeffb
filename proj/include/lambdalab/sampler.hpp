#pragma once

#include <cstdint>

#include "lambdalab/dyadic.hpp"

namespace lambdalab {

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 output finalizer.
constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stateless, index-addressable 64-bit word for (seed, index): entry `index` of
// the SplitMix64 stream whose state starts at finalize(seed). Hashing the seed
// first keeps nearby seeds from sharing low-entropy inputs.
constexpr std::uint64_t mix(std::uint64_t seed, std::uint64_t index) noexcept
{
    return splitmix_finalize(splitmix_finalize(seed) + index * kGoldenGamma);
}

/*
 * Bernoulli draws keyed on (seed, index), with no sequential state.
 *
 * The uniform bit string for (seed, index) starts with the 64 bits of
 * mix(seed, index) (most significant first) and continues with
 * splitmix_finalize(w + k * gamma) for k = 1, 2, ... when more than 64 bits
 * are needed. A probability m / 2^e is decided by reading the first e bits
 * as an integer u and returning u < m. For p = 2^-kappa this is exactly
 * "the top kappa bits are all zero".
 */
bool bernoulli_pow2(std::uint64_t seed, std::uint64_t index, std::uint64_t kappa) noexcept;
bool bernoulli(std::uint64_t seed, std::uint64_t index, const Dyadic& p);

} // namespace lambdalab
