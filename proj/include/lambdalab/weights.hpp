#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lambdalab/dyadic.hpp"

namespace lambdalab {

/// Exact nonnegative ratio num / den of dyadics (den > 0).
struct Fraction {
    Dyadic num;
    Dyadic den{1};

    [[nodiscard]] double to_double() const { return num.to_double() / den.to_double(); }
    [[nodiscard]] std::string to_string() const { return num.to_string() + " / " + den.to_string(); }
};

// Exact three-way comparison by cross multiplication.
int compare(const Fraction& a, const Fraction& b);
int compare(const Fraction& a, const Dyadic& b);

/*
 * Exact nonnegative sum Σ 2^-e over a strictly increasing list of positions e.
 *
 * Used where dyadic terms span more than 127 bits of exponent, e.g. sums of
 * 2^-(j^2) over long index ranges. Addition carries exactly.
 */
class WideDyadic {
public:
    WideDyadic() = default;
    explicit WideDyadic(const Dyadic& d); // d >= 0

    [[nodiscard]] bool is_zero() const noexcept { return positions_.empty(); }
    [[nodiscard]] const std::vector<std::int64_t>& positions() const noexcept { return positions_; }
    [[nodiscard]] WideDyadic scaled(std::int64_t k) const; // times 2^k
    // Exact conversion; OverflowError when the bits span more than 127 positions.
    [[nodiscard]] Dyadic to_dyadic() const;
    // log2 of the value (-inf for zero).
    [[nodiscard]] double log2() const;

    friend WideDyadic operator+(const WideDyadic& a, const WideDyadic& b);
    WideDyadic& operator+=(const WideDyadic& b) { return *this = *this + b; }
    friend bool operator==(const WideDyadic&, const WideDyadic&) = default;
    friend std::strong_ordering operator<=>(const WideDyadic& a, const WideDyadic& b) noexcept;

    static WideDyadic from_positions(std::vector<std::int64_t> strictly_increasing);

private:
    std::vector<std::int64_t> positions_;
};

/*
 * Positive weight sequence c_1, c_2, ...
 *
 *   ones            c_n = 1
 *   geometric:r     c_n = r^n, 0 < r < 1 dyadic
 *   superexp        c_n = 2^-(n^2)
 *   table:a,b,...   finite explicit list
 *
 * tail_bound(n) is an exact upper bound for Σ_{j>n} c_j (nullopt: divergent).
 */
class WeightSeq {
public:
    enum class Rule { Ones, Geometric, SuperExp, Table };

    static WeightSeq ones();
    static WeightSeq geometric(const Dyadic& r);
    static WeightSeq superexp();
    static WeightSeq table(std::vector<Dyadic> values);
    static WeightSeq parse(const std::string& text);

    [[nodiscard]] Rule rule() const noexcept { return rule_; }
    [[nodiscard]] const Dyadic& ratio() const noexcept { return ratio_; }
    [[nodiscard]] const std::vector<Dyadic>& values() const noexcept { return table_; }
    [[nodiscard]] std::string to_string() const;

    [[nodiscard]] Dyadic at(std::uint64_t n) const;
    [[nodiscard]] std::optional<Fraction> tail_bound(std::uint64_t n) const;
    [[nodiscard]] std::optional<std::uint64_t> length() const;

    // True when every c_j is 2^-e(j) with e strictly increasing, so range sums never carry.
    [[nodiscard]] bool distinct_bits() const noexcept;
    [[nodiscard]] std::int64_t bit_position(std::uint64_t j) const;

    [[nodiscard]] WideDyadic wide_at(std::uint64_t n) const;

    friend bool operator==(const WeightSeq&, const WeightSeq&) = default;

private:
    Rule rule_ = Rule::Ones;
    Dyadic ratio_;
    std::vector<Dyadic> table_;
};

/*
 * Exact Σ_{j=first..last} c_j, kept symbolic for distinct-bit rules so that
 * comparisons over index ranges of any length stop at the first differing bit.
 */
class RangeSum {
public:
    RangeSum(const WeightSeq& weights, std::uint64_t first, std::uint64_t last);

    [[nodiscard]] bool empty() const noexcept { return last_ < first_; }
    [[nodiscard]] std::uint64_t first() const noexcept { return first_; }
    [[nodiscard]] std::uint64_t last() const noexcept { return last_; }
    [[nodiscard]] std::uint64_t size() const noexcept { return empty() ? 0 : last_ - first_ + 1; }
    [[nodiscard]] const WeightSeq& weights() const noexcept { return *weights_; }

    // Bits in decreasing value order (increasing position).
    [[nodiscard]] std::uint64_t bit_count() const noexcept;
    [[nodiscard]] std::int64_t bit(std::uint64_t i) const;

    [[nodiscard]] WideDyadic materialize() const;

private:
    const WeightSeq* weights_;
    std::uint64_t first_;
    std::uint64_t last_;
    std::optional<WideDyadic> wide_; // set for rules that carry
};

// Sign of (a · 2^shift_a) - b, exact.
int compare(const RangeSum& a, std::int64_t shift_a, const RangeSum& b);
// a / b in binary64 (0 on underflow). b must be nonempty.
double ratio_approx(const RangeSum& a, const RangeSum& b);
// log2 of the sum; -inf when empty.
double log2_approx(const RangeSum& s);

} // namespace lambdalab
