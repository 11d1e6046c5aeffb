#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lambdalab/dyadic.hpp"
#include "lambdalab/lambda_set.hpp"

namespace lambdalab {

struct GapStats {
    Dyadic horizon;
    // Largest gap between consecutive points in [a, horizon). Exact for dyadic sets.
    std::optional<Dyadic> max_gap_after;
    // Same gap in binary64 (the only form available for log-integer sets).
    std::optional<double> max_gap_after_real;
    // Integers w with [w, w+1) inside [0, horizon) and no point of Λ.
    std::vector<std::int64_t> empty_unit_windows;
};

// Empirical lacunarity predictor: empty unit windows and the largest gap.
GapStats lacunarity_scan(const LambdaSet& set, const Dyadic& a, const Dyadic& horizon);

// Largest gap between consecutive points of Λ ∩ [lo, hi); nullopt with fewer than two points.
std::optional<double> max_gap_real(const LambdaSet& set, const DyadicInterval& window);
std::optional<Dyadic> max_gap(const LambdaSet& set, const DyadicInterval& window);

struct DensityRow {
    Dyadic x;
    bool holds = false;
    std::uint64_t lhs = 0; // #(Λ ∩ [x, x + 2^-L))
    Dyadic rhs;            // p · 2^(⌊x⌋ - L - 2)
};

// Checks #(Λ ∩ [x, x + 2^-L)) > p · 2^(⌊x⌋ - L - 2) at each grid point (x >= 0).
std::vector<DensityRow> density_bound_check(const LambdaSet& set, const Dyadic& p, int L,
    const std::vector<Dyadic>& x_grid);

/// P(A_k) = 1 - (1 - q^(2^m))^len, the chance that some unit window of a
/// thinned block 2^-m N ∩ [n, n + len) loses all of its points.
struct AkProbability {
    std::optional<Dyadic> exact; // unset when the exact value overflows 127 bits
    double approx = 0.0;
    [[nodiscard]] bool overflowed() const noexcept { return !exact.has_value(); }
};

AkProbability ak_probability(int m, const Dyadic& q, std::uint64_t block_len);
// binary64 evaluation for block lengths given as log2 (lengths beyond 2^64 allowed).
double ak_probability_approx(int m, const Dyadic& q, double log2_block_len);

/// Integer sequence rule m_k, k >= 1.
struct ExponentRule {
    enum class Kind { Identity, Constant, Linear, List };
    Kind kind = Kind::Identity;
    std::int64_t a = 1; // Linear: a*k + b; Constant: a
    std::int64_t b = 0;
    std::vector<std::int64_t> values; // List: m_1, m_2, ...

    [[nodiscard]] std::int64_t at(std::int64_t k) const;
    static ExponentRule parse(const std::string& text); // "k", "const:c", "linear:a,b", "list:1,2,3"
};

/// Block lengths n_{k+1} - n_k, k >= 1.
struct LengthRule {
    enum class Kind { Unit, Constant, Ln2SuperExp, List };
    Kind kind = Kind::Unit;
    std::uint64_t c = 1;
    std::vector<std::uint64_t> values;

    struct Length {
        std::optional<std::uint64_t> exact; // unset when the length exceeds 64 bits
        double log2 = 0.0;
    };
    // Ln2SuperExp: ⌈ln 2 · 2^(2^k)⌉.
    [[nodiscard]] Length at(std::int64_t k) const;
    static LengthRule parse(const std::string& text); // "unit", "const:c", "ln2-superexp", "list:1,2"
};

struct AkSeries {
    std::vector<AkProbability> terms;   // k = 1..K
    std::vector<double> partial;        // nondecreasing
    std::optional<Dyadic> exact_partial; // Σ of exact terms when all fit
    double first_decade_increment = 0.0;
    double last_decade_increment = 0.0;
    bool diverging = false; // last-decade increment >= 0.5 * first-decade increment
};

AkSeries ak_series_partial(const ExponentRule& ms, const LengthRule& lens, const Dyadic& q, std::int64_t K);

// True when some unit window [a, a+1) ⊂ [n_lo, n_hi) holds no point of `set`.
bool ak_event(const LambdaSet& set, std::int64_t n_lo, std::int64_t n_hi);

// One draw of A_k: thins 2^-m N ∩ [n_lo, n_lo + len) with keep probability 1 - q
// under `seed` and reports whether a unit window empties. Uses the draws of
// thin(), stopping early; the outcome does not depend on n_lo.
bool ak_trial(int m, const Dyadic& q, std::uint64_t block_len, std::uint64_t seed);

// Monte Carlo oracle for P(A_k): number of seeds where A_k occurs.
std::uint64_t ak_monte_carlo(int m, const Dyadic& q, std::uint64_t block_len, const std::vector<std::uint64_t>& seeds);

} // namespace lambdalab
