#include "lambdalab/sampler.hpp"

namespace lambdalab {

namespace {

// Sequential reader over the bit string of one (seed, index) draw.
class BitReader {
public:
    BitReader(std::uint64_t seed, std::uint64_t index) noexcept : first_(mix(seed, index)), word_(first_) {}

    bool next() noexcept
    {
        if (used_ == 64) {
            ++block_;
            word_ = splitmix_finalize(first_ + block_ * kGoldenGamma);
            used_ = 0;
        }
        const bool bit = ((word_ >> (63 - used_)) & 1U) != 0;
        ++used_;
        return bit;
    }

private:
    std::uint64_t first_;
    std::uint64_t word_;
    std::uint64_t block_ = 0;
    int used_ = 0;
};

} // namespace

bool bernoulli_pow2(std::uint64_t seed, std::uint64_t index, std::uint64_t kappa) noexcept
{
    if (kappa == 0)
        return true;
    const std::uint64_t w = mix(seed, index);
    if (kappa <= 64) {
        return kappa == 64 ? w == 0 : (w >> (64 - kappa)) == 0;
    }
    if (w != 0)
        return false;
    BitReader reader(seed, index);
    for (std::uint64_t i = 0; i < kappa; ++i) {
        if (reader.next())
            return false;
    }
    return true;
}

bool bernoulli(std::uint64_t seed, std::uint64_t index, const Dyadic& p)
{
    if (p.is_negative() || p > Dyadic(1))
        throw InvalidArgument("bernoulli: probability outside [0,1]: " + p.to_string());
    if (p.is_zero())
        return false;
    if (p == Dyadic(1))
        return true;
    if (p.mantissa() == 1)
        return bernoulli_pow2(seed, index, static_cast<std::uint64_t>(p.exponent()));
    // Compare the first e uniform bits with the e-bit mantissa m, most significant first.
    const auto m = static_cast<u128>(p.mantissa());
    const std::int64_t e = p.exponent();
    BitReader reader(seed, index);
    for (std::int64_t pos = e - 1; pos >= 0; --pos) {
        const bool mbit = pos < 128 && ((m >> pos) & 1U) != 0;
        const bool ubit = reader.next();
        if (ubit != mbit)
            return !ubit; // u < m exactly when u has the 0 where m has a 1
    }
    return false; // u == m
}

} // namespace lambdalab
