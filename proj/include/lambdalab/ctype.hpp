#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lambdalab/dyadic.hpp"
#include "lambdalab/lambda_set.hpp"
#include "lambdalab/weights.hpp"
#include "lambdalab/witness.hpp"

namespace lambdalab {

// ---- summable weights ------------------------------------------------------

struct SummableVerdict {
    bool everywhere_convergent = false;
    std::optional<Fraction> bound; // f_bound · (upper bound of Σ c_n)
};

SummableVerdict summable_weights_check(const WeightSeq& c, const Dyadic& f_bound);

// ---- transfer from unweighted to weighted witnesses ------------------------

struct AlphaBlock {
    DyadicInterval interval;
    std::uint64_t first = 0; // ranks j with x + λ_j in the interval for some x in the window
    std::uint64_t last = 0;  // (first > last: none)
    Dyadic alpha;
};

struct AlphaTransfer {
    PiecewiseWitness g;
    std::vector<AlphaBlock> blocks;
};

// g = α_k f on I_k, α_k the smallest power of two with α_k · min c_j >= 1.
AlphaTransfer alpha_transfer(const PiecewiseWitness& f, const LambdaSet& set, const WeightSeq& c,
    const DyadicInterval& d_window);

struct TransferRow {
    Dyadic x;
    std::size_t k; // 0-based block of f
    Dyadic weighted;   // Σ c_j g(x + λ_j) over x + λ_j in I_k
    Dyadic unweighted; // #{j : x + λ_j in I_k}
    bool ok;
};

std::vector<TransferRow> verify_transfer(const AlphaTransfer& t, const LambdaSet& set, const WeightSeq& c,
    const std::vector<Dyadic>& grid);

// ---- fast decay ------------------------------------------------------------

struct FastDecrRow {
    std::uint64_t n;
    std::optional<Fraction> tail; // nullopt: infinite
    Dyadic rhs;                   // 2^-n c_n
    bool holds;
};

struct FastDecrReport {
    std::vector<FastDecrRow> rows;
    std::optional<std::uint64_t> first_failure;
    [[nodiscard]] bool holds() const noexcept { return !first_failure.has_value(); }
};

// Exact test of Σ_{j>n} c_j < 2^-n c_n for n = 1..N, via tail_bound.
FastDecrReport check_fast_decr(const WeightSeq& c, std::uint64_t N);

// ---- the construction -----------------------------------------------------

enum class AnchorStrategy {
    Lambda, // y_1 = λ_1, y_{n+1} = first λ > y_n + 1
    Grid,   // smallest 2^-G grid point (>= y_n + 1 + 2^-G) with Λ ∩ [y, y + 1/2] nonempty
};

struct CTypeBlock {
    Dyadic y;
    std::uint64_t t_first; // T_n = ranks of Λ ∩ [y, y + 1/2], never empty
    std::uint64_t t_last;
    double log2_d; // log2 d_n, d_n = 1 / Σ_{j in T_n} c_j
};

/*
 * f = Σ d_n 1_[y_n, y_n + 1] with d_n = 1 / Σ_{T_n} c_j. d_n is kept as the
 * exact reciprocal of a RangeSum, so d_n · Σ_{T_n} c_j = 1 holds by
 * representation. The weights must outlive the construction.
 */
struct CTypeConstruction {
    LambdaSet set;
    WeightSeq weights;
    std::vector<CTypeBlock> blocks;
    AnchorStrategy strategy = AnchorStrategy::Lambda;
    int grid_exponent = 4;

    [[nodiscard]] RangeSum t_sum(std::size_t n) const; // n is 1-based
    // Ranks j with x + λ_j in [y_n, y_n + 1] (closed).
    [[nodiscard]] RangeSum r_sum(std::size_t n, const Dyadic& x) const;
    // Block n with x in [y_n, y_n + 1], if any.
    [[nodiscard]] std::optional<std::size_t> block_at(const Dyadic& x) const;
};

CTypeConstruction build_construction(const LambdaSet& set, const WeightSeq& c, std::size_t n_blocks,
    AnchorStrategy strategy = AnchorStrategy::Lambda, int grid_exponent = 4);

struct ClaimRow {
    Dyadic x;
    std::size_t n;
    double block_contribution; // d_n Σ_{R_n(x)} c_j; +inf past binary64 range
    double log2_contribution;
    double partial;            // through block n
    std::string bound;         // the exact inequality checked for this block
    bool ok;
};

struct ClaimReport {
    std::vector<ClaimRow> rows; // ordered by x, then n
    bool all_ok = true;
    std::string first_violation;
};

// x in [0, 1/2]: exact check d_n Σ_{R_n(x)} c_j >= 1 per block, hence partial through n >= n.
ClaimReport verify_claim_divergence(const CTypeConstruction& con, const std::vector<Dyadic>& grid, std::size_t N,
    unsigned threads = 1);
// x < -1/2: exact check d_n Σ_{R_n(x)} c_j < 2^-n per block, hence every partial < 1.
ClaimReport verify_claim_convergence(const CTypeConstruction& con, const std::vector<Dyadic>& grid, std::size_t N,
    unsigned threads = 1);

// Per-block binary64 partials of s_c(x) and their advisory label.
struct CTypeTrajectory {
    std::vector<double> partials;
    SumLabel label;
};
CTypeTrajectory ctype_trajectory(const CTypeConstruction& con, const Dyadic& x, std::size_t N);

} // namespace lambdalab
