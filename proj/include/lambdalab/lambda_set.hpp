#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include "lambdalab/dyadic.hpp"

namespace lambdalab {

inline constexpr std::uint64_t kDefaultEnumerationCap = 100'000'000;

// Process-wide cap on the number of points a single enumeration may produce.
std::uint64_t enumeration_cap() noexcept;
void set_enumeration_cap(std::uint64_t cap) noexcept;

/// 2^-m N intersected with [n_lo, n_hi); contributes (n_hi - n_lo) * 2^m points.
struct DyadicBlock {
    int m = 0;
    std::int64_t n_lo = 0;
    std::int64_t n_hi = 0;

    [[nodiscard]] std::uint64_t size() const;
    friend bool operator==(const DyadicBlock&, const DyadicBlock&) = default;
};

struct IndexedPoint {
    std::uint64_t rank; // 1-based position in the increasing enumeration of the set
    Dyadic point;
};

/*
 * A discrete set bounded below, described finitely.
 *
 * Kinds:
 *   blocks    finite list of dyadic blocks
 *   ladder    2^-k N ∩ [k, k+1) for k = 1..k_max (unbounded when k_max is unset)
 *   log       { ln n : 1 <= n <= max_n } (binary64 points)
 *   explicit  sorted list of dyadic points
 *   thinned   base point of rank r kept iff bernoulli(seed, r, p)
 *
 * Points are ranked 1, 2, ... in increasing order. All queries are const and
 * pure; a LambdaSet may be shared between threads.
 */
class LambdaSet {
public:
    struct Blocks {
        std::vector<DyadicBlock> blocks;
        std::vector<std::uint64_t> before; // points preceding each block
    };
    struct Ladder {
        std::optional<std::int64_t> k_max;
    };
    struct LogIntegers {
        std::uint64_t max_n = 0;
    };
    struct Explicit {
        std::vector<Dyadic> points;
    };
    struct Thinned {
        std::shared_ptr<const LambdaSet> base;
        Dyadic p;
        std::uint64_t seed = 0;
    };
    using Kind = std::variant<Blocks, Ladder, LogIntegers, Explicit, Thinned>;

    static LambdaSet dyadic_blocks(std::vector<DyadicBlock> blocks);
    static LambdaSet ladder(std::optional<std::int64_t> k_max = std::nullopt);
    static LambdaSet log_integers(std::uint64_t max_n);
    static LambdaSet explicit_points(std::vector<Dyadic> points);

    [[nodiscard]] const Kind& kind() const noexcept { return kind_; }
    [[nodiscard]] bool is_dyadic() const noexcept;
    [[nodiscard]] bool is_thinned() const noexcept { return std::holds_alternative<Thinned>(kind_); }
    // Number of points, or nullopt for an unbounded ladder.
    [[nodiscard]] std::optional<std::uint64_t> size() const;
    [[nodiscard]] bool is_finite() const { return size().has_value(); }

    // #{λ < v}. Closed form for block kinds and log-integers.
    [[nodiscard]] std::uint64_t count_before(const Dyadic& v) const;
    // #(Λ ∩ [x, x + a)), a > 0.
    [[nodiscard]] std::uint64_t count_in(const Dyadic& x, const Dyadic& a) const;
    [[nodiscard]] std::uint64_t count_in(const DyadicInterval& window) const;
    // #(Λ ∩ [lo, hi]) with both endpoints closed.
    [[nodiscard]] std::uint64_t count_closed(const Dyadic& lo, const Dyadic& hi) const;
    [[nodiscard]] bool contains(const Dyadic& v) const;

    // Point of the given 1-based rank; nullopt past the end.
    [[nodiscard]] std::optional<Dyadic> point_at(std::uint64_t rank) const;
    // Smallest point >= v (or > v when strict).
    [[nodiscard]] std::optional<Dyadic> first_from(const Dyadic& v, bool strict = false) const;

    // Sorted points in [lo, hi). WindowTooLarge past the enumeration cap.
    [[nodiscard]] std::vector<Dyadic> enumerate(const DyadicInterval& window) const;
    [[nodiscard]] std::vector<IndexedPoint> enumerate_indexed(const DyadicInterval& window) const;
    // Works for every kind; log-integer points are ln(n) in binary64.
    [[nodiscard]] std::vector<double> enumerate_real(const DyadicInterval& window) const;

    // Streams the points of [lo, hi) in order without materializing them.
    // Thinned sets stream their base, so the cap applies to base points.
    void for_each(const DyadicInterval& window, const std::function<void(const IndexedPoint&)>& fn) const;

    // Smallest gap between consecutive points of Λ ∩ [lo, hi]; nullopt with fewer than two points.
    [[nodiscard]] std::optional<Dyadic> min_gap(const Dyadic& lo, const Dyadic& hi) const;

    // Largest gap between consecutive points of Λ ∩ [lo, hi). Closed form for block kinds.
    [[nodiscard]] std::optional<Dyadic> max_gap(const DyadicInterval& window) const;

    // Growth of unit-window counts: #(Λ ∩ [l, l+1)) <= 2^(exponent * l) for every l.
    // nullopt when Λ is finite.
    [[nodiscard]] std::optional<int> unit_growth_exponent() const;

private:
    explicit LambdaSet(Kind kind) : kind_(std::move(kind)) {}
    friend LambdaSet thin(const LambdaSet& base, const Dyadic& p, std::uint64_t seed);

    Kind kind_;
};

// Keep each point of `base` independently with probability p, keyed on its rank.
LambdaSet thin(const LambdaSet& base, const Dyadic& p, std::uint64_t seed);

// Exact floor(e^v) for dyadic v > 0, saturating at UINT64_MAX.
std::uint64_t floor_exp(const Dyadic& v);

} // namespace lambdalab
