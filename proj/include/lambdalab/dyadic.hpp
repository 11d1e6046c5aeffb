#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>

#include "lambdalab/errors.hpp"

namespace lambdalab {

using i128 = __int128;
using u128 = unsigned __int128;

/*
 * Dyadic rational mantissa / 2^exponent.
 *
 * Canonical form: exponent == 0 or mantissa is odd. Zero is (0, 0).
 * Two dyadics are equal as numbers iff their canonical forms coincide, so
 * the defaulted member-wise equality is value equality.
 *
 * Arithmetic is exact. When a result needs more than 127 mantissa bits an
 * OverflowError is thrown; nothing is rounded.
 */
class Dyadic {
public:
    constexpr Dyadic() = default;
    // Integer value.
    Dyadic(std::int64_t value) : Dyadic(static_cast<i128>(value), 0) {} // NOLINT
    // mantissa * 2^-exponent; a negative exponent multiplies by 2^|exponent|.
    Dyadic(i128 mantissa, std::int64_t exponent);

    static Dyadic pow2(std::int64_t k); // 2^k for any integer k
    static Dyadic parse(std::string_view text); // "m/2^e", "m*2^k", "m/d" with d = 2^e, or an integer

    [[nodiscard]] i128 mantissa() const noexcept { return mantissa_; }
    [[nodiscard]] std::int64_t exponent() const noexcept { return exponent_; }

    [[nodiscard]] bool is_zero() const noexcept { return mantissa_ == 0; }
    [[nodiscard]] bool is_negative() const noexcept { return mantissa_ < 0; }
    [[nodiscard]] bool is_positive() const noexcept { return mantissa_ > 0; }
    [[nodiscard]] bool is_integer() const noexcept { return exponent_ == 0; }
    [[nodiscard]] int sign() const noexcept { return (mantissa_ > 0) - (mantissa_ < 0); }
    // True for 2^k, k any integer.
    [[nodiscard]] bool is_power_of_two() const noexcept;
    // floor(log2 |x|); x must be nonzero.
    [[nodiscard]] std::int64_t floor_log2() const;

    // Multiply by 2^k exactly.
    [[nodiscard]] Dyadic scaled(std::int64_t k) const;
    [[nodiscard]] Dyadic abs() const;

    // Integer part, rounding towards -inf / +inf. Throws if it does not fit.
    [[nodiscard]] std::int64_t floor_int() const;
    [[nodiscard]] std::int64_t ceil_int() const;

    // binary64 conversion; `lossy` set when the value is not exactly representable.
    [[nodiscard]] double to_double(bool* lossy = nullptr) const noexcept;

    // Canonical "m/2^e".
    [[nodiscard]] std::string to_string() const;

    friend Dyadic operator+(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator-(const Dyadic& a, const Dyadic& b);
    friend Dyadic operator*(const Dyadic& a, const Dyadic& b);
    Dyadic operator-() const;
    Dyadic& operator+=(const Dyadic& b) { return *this = *this + b; }
    Dyadic& operator-=(const Dyadic& b) { return *this = *this - b; }
    Dyadic& operator*=(const Dyadic& b) { return *this = *this * b; }

    friend bool operator==(const Dyadic&, const Dyadic&) = default;
    friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) noexcept;

private:
    i128 mantissa_ = 0;
    std::int64_t exponent_ = 0;
};

enum class Cmp { LT, EQ, GT };

Dyadic dyadic_add(const Dyadic& a, const Dyadic& b);
Dyadic dyadic_sub(const Dyadic& a, const Dyadic& b);
Dyadic dyadic_mul(const Dyadic& a, const Dyadic& b);
Cmp dyadic_cmp(const Dyadic& a, const Dyadic& b) noexcept;

// Largest multiple of 2^-e that is <= x.
Dyadic floor_to_grid(const Dyadic& x, std::int64_t e);
// Smallest multiple of 2^-e that is >= x.
Dyadic ceil_to_grid(const Dyadic& x, std::int64_t e);

// Exact x^n by repeated squaring.
Dyadic dyadic_pow(const Dyadic& x, std::uint64_t n);

std::ostream& operator<<(std::ostream& os, const Dyadic& d);

std::string i128_to_string(i128 v);
// Position of the highest set bit plus one; 0 for v == 0.
int bit_length(u128 v) noexcept;
int count_trailing_zeros(u128 v) noexcept;

/// Half-open interval [lo, hi) with dyadic endpoints, lo < hi.
class DyadicInterval {
public:
    DyadicInterval(Dyadic lo, Dyadic hi);

    [[nodiscard]] const Dyadic& lo() const noexcept { return lo_; }
    [[nodiscard]] const Dyadic& hi() const noexcept { return hi_; }
    [[nodiscard]] Dyadic length() const { return hi_ - lo_; }
    [[nodiscard]] bool contains(const Dyadic& x) const noexcept { return lo_ <= x && x < hi_; }
    [[nodiscard]] bool intersects(const DyadicInterval& o) const noexcept
    {
        return lo_ < o.hi_ && o.lo_ < hi_;
    }
    [[nodiscard]] std::string to_string() const;

    friend bool operator==(const DyadicInterval&, const DyadicInterval&) = default;

private:
    Dyadic lo_;
    Dyadic hi_;
};

} // namespace lambdalab

template <>
struct std::hash<lambdalab::Dyadic> {
    std::size_t operator()(const lambdalab::Dyadic& d) const noexcept
    {
        const auto m = static_cast<lambdalab::u128>(d.mantissa());
        std::size_t h = std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(m));
        h ^= std::hash<std::uint64_t>{}(static_cast<std::uint64_t>(m >> 64)) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        h ^= std::hash<std::int64_t>{}(d.exponent()) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};
