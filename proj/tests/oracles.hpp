// Test-side reference implementations. Nothing here calls into the library's
// arithmetic: values are rebuilt with GMP rationals and plain integer loops.
#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "lambdalab/dyadic.hpp"

namespace oracle {

inline mpz_class i128_to_mpz(lambdalab::i128 v)
{
    const bool neg = v < 0;
    auto u = neg ? static_cast<lambdalab::u128>(-(v + 1)) + 1 : static_cast<lambdalab::u128>(v);
    mpz_class hi(static_cast<unsigned long>(u >> 64));
    mpz_class lo(static_cast<unsigned long>(static_cast<std::uint64_t>(u)));
    mpz_class r = (hi << 64) + lo;
    return neg ? mpz_class(-r) : r;
}

inline mpq_class q(const lambdalab::Dyadic& d)
{
    mpq_class r(i128_to_mpz(d.mantissa()));
    if (d.exponent() > 0)
        mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(d.exponent()));
    return r;
}

inline mpq_class pow2(long k)
{
    mpq_class r(1);
    if (k >= 0)
        mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(k));
    else
        mpq_div_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<mp_bitcnt_t>(-k));
    return r;
}

// Λ̃ ∩ [0, k_max + 1), built from the definition: i / 2^k for k <= i / 2^k < k + 1.
inline std::vector<mpq_class> ladder_points(int k_max)
{
    std::vector<mpq_class> pts;
    for (int k = 1; k <= k_max; ++k) {
        const long den = 1L << k;
        for (long i = static_cast<long>(k) * den; i < static_cast<long>(k + 1) * den; ++i)
            pts.emplace_back(mpq_class(i, den));
    }
    for (auto& p : pts)
        p.canonicalize();
    return pts;
}

inline std::size_t count_half_open(const std::vector<mpq_class>& pts, const mpq_class& lo, const mpq_class& hi)
{
    std::size_t n = 0;
    for (const auto& p : pts)
        n += (lo <= p && p < hi) ? 1 : 0;
    return n;
}

// SplitMix64 finalizer as published (Steele, Lea, Flood).
inline std::uint64_t splitmix(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Entry i of the SplitMix64 stream started at splitmix(seed).
inline std::uint64_t mix(std::uint64_t seed, std::uint64_t i)
{
    return splitmix(splitmix(seed) + i * 0x9E3779B97F4A7C15ULL);
}

// Random dyadic m / 2^e with |m| < 2^bits, 0 <= e <= max_e.
inline lambdalab::Dyadic random_dyadic(std::mt19937_64& rng, int bits, int max_e, bool nonneg = false)
{
    std::uniform_int_distribution<std::int64_t> m(nonneg ? 0 : -((std::int64_t{1} << bits) - 1), (std::int64_t{1} << bits) - 1);
    std::uniform_int_distribution<int> e(0, max_e);
    return lambdalab::Dyadic(static_cast<lambdalab::i128>(m(rng)), e(rng));
}

} // namespace oracle
