#include "lambdalab/dyadic.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <ostream>

namespace lambdalab {

namespace {

constexpr int kMantissaBits = 127; // magnitude bits available in i128

u128 magnitude(i128 v) noexcept
{
    return v < 0 ? u128(0) - static_cast<u128>(v) : static_cast<u128>(v);
}

[[noreturn]] void overflow(const char* what)
{
    throw OverflowError(std::string("dyadic overflow: ") + what);
}

// m * 2^s, s >= 0.
i128 shift_left_checked(i128 m, std::int64_t s)
{
    if (m == 0 || s == 0)
        return m;
    if (s >= kMantissaBits || bit_length(magnitude(m)) + s > kMantissaBits)
        overflow("mantissa shift");
    return static_cast<i128>(static_cast<u128>(m) << s);
}

std::int64_t add_exponents(std::int64_t a, std::int64_t b)
{
    std::int64_t r = 0;
    if (__builtin_add_overflow(a, b, &r))
        overflow("exponent");
    return r;
}

} // namespace

int bit_length(u128 v) noexcept
{
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    if (hi != 0)
        return 128 - __builtin_clzll(hi);
    const auto lo = static_cast<std::uint64_t>(v);
    return lo == 0 ? 0 : 64 - __builtin_clzll(lo);
}

int count_trailing_zeros(u128 v) noexcept
{
    const auto lo = static_cast<std::uint64_t>(v);
    if (lo != 0)
        return __builtin_ctzll(lo);
    const auto hi = static_cast<std::uint64_t>(v >> 64);
    return hi == 0 ? 128 : 64 + __builtin_ctzll(hi);
}

std::string i128_to_string(i128 v)
{
    if (v == 0)
        return "0";
    u128 mag = magnitude(v);
    std::string digits;
    while (mag != 0) {
        digits.push_back(static_cast<char>('0' + static_cast<int>(mag % 10)));
        mag /= 10;
    }
    if (v < 0)
        digits.push_back('-');
    std::reverse(digits.begin(), digits.end());
    return digits;
}

Dyadic::Dyadic(i128 mantissa, std::int64_t exponent)
{
    if (mantissa == 0) {
        return;
    }
    if (exponent < 0) {
        if (exponent == std::numeric_limits<std::int64_t>::min())
            overflow("exponent");
        mantissa = shift_left_checked(mantissa, -exponent);
        exponent = 0;
    }
    const std::int64_t tz = std::min<std::int64_t>(count_trailing_zeros(magnitude(mantissa)), exponent);
    mantissa_ = mantissa >> tz;
    exponent_ = exponent - tz;
}

Dyadic Dyadic::pow2(std::int64_t k)
{
    if (k >= 0) {
        if (k >= kMantissaBits)
            overflow("pow2");
        return Dyadic(static_cast<i128>(1) << k, 0);
    }
    if (k == std::numeric_limits<std::int64_t>::min())
        overflow("pow2");
    return Dyadic(1, -k);
}

bool Dyadic::is_power_of_two() const noexcept
{
    if (mantissa_ <= 0)
        return false;
    const auto m = static_cast<u128>(mantissa_);
    return (m & (m - 1)) == 0;
}

std::int64_t Dyadic::floor_log2() const
{
    if (mantissa_ == 0)
        throw InvalidArgument("floor_log2 of zero");
    return static_cast<std::int64_t>(bit_length(magnitude(mantissa_))) - 1 - exponent_;
}

Dyadic Dyadic::scaled(std::int64_t k) const
{
    if (mantissa_ == 0)
        return *this;
    if (k >= 0) {
        if (k <= exponent_)
            return Dyadic(mantissa_, exponent_ - k);
        return Dyadic(shift_left_checked(mantissa_, k - exponent_), 0);
    }
    if (k == std::numeric_limits<std::int64_t>::min())
        overflow("exponent");
    return Dyadic(mantissa_, add_exponents(exponent_, -k));
}

Dyadic Dyadic::abs() const
{
    return mantissa_ < 0 ? -*this : *this;
}

std::int64_t Dyadic::floor_int() const
{
    const Dyadic f = floor_to_grid(*this, 0);
    if (f.mantissa_ > std::numeric_limits<std::int64_t>::max() || f.mantissa_ < std::numeric_limits<std::int64_t>::min())
        overflow("integer conversion");
    return static_cast<std::int64_t>(f.mantissa_);
}

std::int64_t Dyadic::ceil_int() const
{
    const Dyadic c = ceil_to_grid(*this, 0);
    if (c.mantissa_ > std::numeric_limits<std::int64_t>::max() || c.mantissa_ < std::numeric_limits<std::int64_t>::min())
        overflow("integer conversion");
    return static_cast<std::int64_t>(c.mantissa_);
}

double Dyadic::to_double(bool* lossy) const noexcept
{
    if (mantissa_ == 0) {
        if (lossy)
            *lossy = false;
        return 0.0;
    }
    const int bits = bit_length(magnitude(mantissa_));
    double value = 0.0;
    if (exponent_ > 2000) {
        value = 0.0;
    } else {
        value = std::ldexp(static_cast<double>(mantissa_), -static_cast<int>(exponent_));
    }
    if (lossy) {
        // Exact iff the mantissa fits 53 bits and the lowest bit is not below 2^-1074.
        *lossy = bits > 53 || exponent_ > 1074;
    }
    return value;
}

std::string Dyadic::to_string() const
{
    return i128_to_string(mantissa_) + "/2^" + std::to_string(exponent_);
}

Dyadic Dyadic::operator-() const
{
    if (mantissa_ == std::numeric_limits<i128>::min())
        overflow("negation");
    Dyadic r;
    r.mantissa_ = -mantissa_;
    r.exponent_ = exponent_;
    return r;
}

Dyadic operator+(const Dyadic& a, const Dyadic& b)
{
    if (a.mantissa_ == 0)
        return b;
    if (b.mantissa_ == 0)
        return a;
    const std::int64_t e = std::max(a.exponent_, b.exponent_);
    const i128 am = shift_left_checked(a.mantissa_, e - a.exponent_);
    const i128 bm = shift_left_checked(b.mantissa_, e - b.exponent_);
    i128 sum = 0;
    if (__builtin_add_overflow(am, bm, &sum))
        overflow("addition");
    return Dyadic(sum, e);
}

Dyadic operator-(const Dyadic& a, const Dyadic& b)
{
    if (b.mantissa_ == 0)
        return a;
    const std::int64_t e = std::max(a.exponent_, b.exponent_);
    const i128 am = shift_left_checked(a.mantissa_, e - a.exponent_);
    const i128 bm = shift_left_checked(b.mantissa_, e - b.exponent_);
    i128 diff = 0;
    if (__builtin_sub_overflow(am, bm, &diff))
        overflow("subtraction");
    return Dyadic(diff, e);
}

Dyadic operator*(const Dyadic& a, const Dyadic& b)
{
    if (a.mantissa_ == 0 || b.mantissa_ == 0)
        return Dyadic();
    i128 prod = 0;
    if (__builtin_mul_overflow(a.mantissa_, b.mantissa_, &prod))
        overflow("multiplication");
    // Product of odd mantissas is odd, so this is already canonical unless one side is an integer.
    return Dyadic(prod, add_exponents(a.exponent_, b.exponent_));
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) noexcept
{
    const int sa = a.sign();
    const int sb = b.sign();
    if (sa != sb)
        return sa <=> sb;
    if (sa == 0)
        return std::strong_ordering::equal;
    if (a.exponent_ == b.exponent_)
        return a.mantissa_ <=> b.mantissa_;
    // Same sign: align the coarser operand to the finer exponent.
    const bool a_coarser = a.exponent_ < b.exponent_;
    const Dyadic& coarse = a_coarser ? a : b;
    const Dyadic& fine = a_coarser ? b : a;
    const std::int64_t shift = fine.exponent_ - coarse.exponent_;
    const u128 cmag = magnitude(coarse.mantissa_);
    std::strong_ordering mag_order = std::strong_ordering::equal; // |coarse| vs |fine|
    if (shift >= kMantissaBits || bit_length(cmag) + shift > kMantissaBits) {
        // |coarse| * 2^shift exceeds every 127-bit magnitude.
        mag_order = std::strong_ordering::greater;
    } else {
        mag_order = (cmag << shift) <=> magnitude(fine.mantissa_);
    }
    if (!a_coarser)
        mag_order = 0 <=> mag_order;
    // For negatives larger magnitude means smaller value.
    return sa > 0 ? mag_order : 0 <=> mag_order;
}

Dyadic dyadic_add(const Dyadic& a, const Dyadic& b) { return a + b; }
Dyadic dyadic_sub(const Dyadic& a, const Dyadic& b) { return a - b; }
Dyadic dyadic_mul(const Dyadic& a, const Dyadic& b) { return a * b; }

Cmp dyadic_cmp(const Dyadic& a, const Dyadic& b) noexcept
{
    const auto o = a <=> b;
    if (o < 0)
        return Cmp::LT;
    if (o > 0)
        return Cmp::GT;
    return Cmp::EQ;
}

Dyadic floor_to_grid(const Dyadic& x, std::int64_t e)
{
    if (e < 0)
        throw InvalidArgument("floor_to_grid: negative grid exponent");
    if (x.exponent() <= e)
        return x;
    // Arithmetic shift rounds towards -inf.
    const std::int64_t drop = x.exponent() - e;
    if (drop >= 127)
        return Dyadic(x.is_negative() ? -1 : 0, e);
    return Dyadic(x.mantissa() >> drop, e);
}

Dyadic ceil_to_grid(const Dyadic& x, std::int64_t e)
{
    const Dyadic f = floor_to_grid(x, e);
    if (f == x)
        return f;
    return f + Dyadic(1, e);
}

Dyadic dyadic_pow(const Dyadic& x, std::uint64_t n)
{
    Dyadic result(1);
    Dyadic base = x;
    while (n != 0) {
        if (n & 1U)
            result = result * base;
        n >>= 1U;
        if (n != 0)
            base = base * base;
    }
    return result;
}

std::ostream& operator<<(std::ostream& os, const Dyadic& d)
{
    return os << d.to_string();
}

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
        s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
        s.remove_suffix(1);
    return s;
}

i128 parse_integer(std::string_view s, std::string_view whole)
{
    bool negative = false;
    if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty())
        throw ParseError("malformed dyadic: '" + std::string(whole) + "'");
    u128 value = 0;
    const u128 limit = static_cast<u128>(std::numeric_limits<i128>::max());
    for (char ch : s) {
        if (ch < '0' || ch > '9')
            throw ParseError("malformed dyadic: '" + std::string(whole) + "'");
        value = value * 10 + static_cast<u128>(ch - '0');
        if (value > limit)
            throw OverflowError("dyadic literal exceeds 127-bit mantissa: '" + std::string(whole) + "'");
    }
    const auto v = static_cast<i128>(value);
    return negative ? -v : v;
}

std::int64_t parse_small(std::string_view s, std::string_view whole)
{
    const i128 v = parse_integer(s, whole);
    if (v > std::numeric_limits<std::int64_t>::max() / 2 || v < std::numeric_limits<std::int64_t>::min() / 2)
        throw OverflowError("dyadic exponent out of range: '" + std::string(whole) + "'");
    return static_cast<std::int64_t>(v);
}

} // namespace

Dyadic Dyadic::parse(std::string_view text)
{
    const std::string_view s = trim(text);
    if (const auto slash = s.find('/'); slash != std::string_view::npos) {
        const std::string_view rest = trim(s.substr(slash + 1));
        if (rest.substr(0, 2) != "2^") {
            // Plain m/d with d a power of two.
            const i128 d = parse_integer(rest, text);
            if (d <= 0 || (d & (d - 1)) != 0)
                throw ParseError("not a dyadic rational: '" + std::string(text) + "'");
            return Dyadic(parse_integer(trim(s.substr(0, slash)), text),
                bit_length(static_cast<u128>(d)) - 1);
        }
        const std::int64_t e = parse_small(trim(rest.substr(2)), text);
        if (e < 0)
            throw ParseError("malformed dyadic (negative exponent in m/2^e): '" + std::string(text) + "'");
        return Dyadic(parse_integer(trim(s.substr(0, slash)), text), e);
    }
    if (const auto star = s.find('*'); star != std::string_view::npos) {
        const std::string_view rest = trim(s.substr(star + 1));
        if (rest.substr(0, 2) != "2^")
            throw ParseError("malformed dyadic (expected m*2^-e): '" + std::string(text) + "'");
        const std::int64_t k = parse_small(trim(rest.substr(2)), text);
        return Dyadic(parse_integer(trim(s.substr(0, star)), text), -k);
    }
    return Dyadic(parse_integer(s, text), 0);
}

DyadicInterval::DyadicInterval(Dyadic lo, Dyadic hi) : lo_(lo), hi_(hi)
{
    if (!(lo_ < hi_))
        throw InvalidArgument("empty interval [" + lo_.to_string() + ", " + hi_.to_string() + ")");
}

std::string DyadicInterval::to_string() const
{
    return "[" + lo_.to_string() + ", " + hi_.to_string() + ")";
}

} // namespace lambdalab
