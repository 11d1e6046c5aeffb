#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "lambdalab/dyadic.hpp"
#include "lambdalab/lambda_set.hpp"
#include "lambdalab/weights.hpp"

namespace lambdalab {

struct WitnessBlock {
    DyadicInterval interval;
    Dyadic level; // > 0

    friend bool operator==(const WitnessBlock&, const WitnessBlock&) = default;
};

/*
 * Nonnegative step function: `level` on each block, 0 elsewhere.
 *
 * Blocks are half-open, sorted and pairwise disjoint. A witness produced by a
 * generator only knows its blocks below `defined_below`; evaluating at or
 * past that point throws GeneratorExhausted.
 */
class PiecewiseWitness {
public:
    PiecewiseWitness() = default;
    explicit PiecewiseWitness(std::vector<WitnessBlock> blocks, std::optional<Dyadic> defined_below = std::nullopt);

    static PiecewiseWitness indicator(const DyadicInterval& interval, const Dyadic& level = Dyadic(1));

    [[nodiscard]] const std::vector<WitnessBlock>& blocks() const noexcept { return blocks_; }
    [[nodiscard]] const std::optional<Dyadic>& defined_below() const noexcept { return defined_below_; }
    [[nodiscard]] bool empty() const noexcept { return blocks_.empty(); }

    [[nodiscard]] Dyadic eval(const Dyadic& x) const;
    // Block endpoints compared in binary64; for sums over log-integer sets.
    [[nodiscard]] double eval_real(double x) const;
    void require_defined(const Dyadic& x) const;

    [[nodiscard]] Dyadic sup_level() const;
    [[nodiscard]] bool is_characteristic() const;
    // [inf of first block, sup of last block); nullopt when empty.
    [[nodiscard]] std::optional<DyadicInterval> hull() const;
    // Adjacent blocks with equal levels fused.
    [[nodiscard]] PiecewiseWitness merged() const;

    friend bool operator==(const PiecewiseWitness&, const PiecewiseWitness&) = default;

private:
    std::vector<WitnessBlock> blocks_;
    std::optional<Dyadic> defined_below_;
};

Dyadic eval_witness(const PiecewiseWitness& f, const Dyadic& x);

/// Lazily described witness: rule(i) gives block i (0-based) or nullopt when done.
/// The rule must be pure and its blocks strictly increasing.
class WitnessGenerator {
public:
    using Rule = std::function<std::optional<WitnessBlock>(std::uint64_t)>;

    explicit WitnessGenerator(Rule rule) : rule_(std::move(rule)) {}

    // Immutable finite witness holding every block below `horizon` (clipped).
    [[nodiscard]] PiecewiseWitness snapshot(const Dyadic& horizon) const;

private:
    Rule rule_;
};

// Pointwise combination: op(f(x), g(x)); results <= 0 become gaps.
PiecewiseWitness combine(const PiecewiseWitness& f, const PiecewiseWitness& g,
    const std::function<Dyadic(const Dyadic&, const Dyadic&)>& op);

// ---- partial sums ----------------------------------------------------------

struct PartialSum {
    Dyadic value;
    std::uint64_t terms = 0; // λ <= λ_max with f(x + λ) > 0
};

// Exact Σ_{λ_n <= λ_max} c_n f(x + λ_n). Needs a dyadic Λ.
PartialSum partial_sum(const PiecewiseWitness& f, const LambdaSet& set, const WeightSeq& c, const Dyadic& x,
    const Dyadic& lambda_max);

struct PartialSumReal {
    double value = 0.0;
    std::uint64_t terms = 0;
    double error_bound = 0.0; // one ulp of the running sum per term
};

// binary64 variant for any Λ, including log-integers.
PartialSumReal partial_sum_real(const PiecewiseWitness& f, const LambdaSet& set, const WeightSeq& c, double x,
    double lambda_max);

enum class SumLabel { Convergent, Divergent, Undecided };
std::string to_string(SumLabel label);

struct ClassifyThresholds {
    double divergence_slope = 0.5;
    double divergence_floor = 10.0;
    double convergence_eps = 0.0; // 0 means exact stagnation

    static ClassifyThresholds exact() { return {}; }
    static ClassifyThresholds floating() { return {0.5, 10.0, 0x1p-40}; }
};

/*
 * Advisory label for a nondecreasing run of partial sums P_0..P_{H-1}.
 * With d = max(1, H/10): Divergent when P_{H-1} - P_{H-1-d} >= slope * P_{d-1}
 * and P_{H-1} > floor; Convergent when every increment from index H/2 on is
 * <= eps; otherwise Undecided. A binary64 run ending in +inf is Divergent.
 */
SumLabel classify_partials(const std::vector<double>& partials, const ClassifyThresholds& t);
SumLabel classify_partials(const std::vector<Dyadic>& partials, const ClassifyThresholds& t);

struct SumTrajectory {
    Dyadic x;
    std::vector<Dyadic> horizons;
    std::vector<Dyadic> partials;
    SumLabel label = SumLabel::Undecided;
};

SumTrajectory classify_trajectory(const PiecewiseWitness& f, const LambdaSet& set, const WeightSeq& c,
    const Dyadic& x, const std::vector<Dyadic>& horizons,
    const ClassifyThresholds& thresholds = ClassifyThresholds::exact());

// ---- regularization pipeline ----------------------------------------------

struct EpsLevel {
    std::int64_t k;
    DyadicInterval interval; // I_1 = [window_lo, 1), I_k = [k-1, k)
    std::uint64_t count;     // #(Λ ∩ [inf I_k - K, sup I_k + K))
    Dyadic eps;
};

struct RegularizeResult {
    PiecewiseWitness f0;
    std::vector<EpsLevel> levels;
};

// f0 = f + ε_k on I_k for k = 1..horizon, ε_k the largest power of two <= 2^-k / max(1, count).
RegularizeResult regularize_f0(const PiecewiseWitness& f, const LambdaSet& set, std::int64_t K,
    std::int64_t window_lo, std::int64_t horizon);

PiecewiseWitness clip_f1(const PiecewiseWitness& f0);

// Each level becomes the largest power of two strictly below it. With
// normalize_below_zero, f2 is set to 1 on [window_lo, 0).
PiecewiseWitness quantize_f2(const PiecewiseWitness& f1, bool normalize_below_zero = false, std::int64_t window_lo = 0);

enum class DeltaRule {
    UnitMax, // 2^-k / max(1, max_{0<=l<=k+K} #(Λ ∩ [l, l+1)))
    Window2, // 2^-k / max(1, #(Λ ∩ [k, k+2)))
};

// δ_k rounded down to a power of two (k clamped to >= 1).
Dyadic delta_k(const LambdaSet& set, std::int64_t k, std::int64_t K, DeltaRule rule);

struct UnitBudget {
    std::int64_t k; // unit interval [k-1, k)
    Dyadic delta;
    Dyadic changed;        // exact measure of {f2 != f3} ∩ [k-1, k)
    int grid_exponent = -1; // endpoints snapped to 2^-grid_exponent; -1 when untouched
};

struct SimplifyResult {
    PiecewiseWitness f3;
    std::vector<UnitBudget> units;
};

// Rewrites f2 as finite [x, y) unions per unit interval. With snap_exponent set,
// endpoints move to the coarsest 2^-t grid (t <= snap_exponent) whose change stays <= 2δ_k.
SimplifyResult simplify_f3(const PiecewiseWitness& f2, const LambdaSet& set, std::int64_t K, DeltaRule rule,
    std::optional<int> snap_exponent = std::nullopt);

// ---- modification criterion -----------------------------------------------

struct EpsSchedule {
    enum class Kind {
        Exp2,  // ε(x) = 2^(-a x)
        Delta, // ε(x) = 2 δ_max(⌈x⌉, 1): the per-unit change budget of simplify_f3
    };
    Kind kind = Kind::Exp2;
    std::int64_t a = 2;
    DeltaRule rule = DeltaRule::UnitMax;

    [[nodiscard]] Dyadic at(const LambdaSet& set, std::int64_t x, std::int64_t K) const;
    static EpsSchedule parse(const std::string& text); // "exp2:a", "delta", "delta:window2"
};

enum class SeriesVerdict { Summable, Unknown };
std::string to_string(SeriesVerdict v);

struct ModificationReport {
    std::vector<Dyadic> terms;    // l = 0..horizon: ε(l - K) · #(Λ ∩ [l, l+1))
    std::vector<Dyadic> partials;
    SeriesVerdict verdict = SeriesVerdict::Unknown;
    bool diverging_trend = false;
    std::string reason;
};

ModificationReport modification_series_check(const LambdaSet& set, const EpsSchedule& eps, std::int64_t K,
    std::int64_t horizon);

} // namespace lambdalab
