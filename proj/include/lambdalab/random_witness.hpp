#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "lambdalab/dyadic.hpp"
#include "lambdalab/lambda_set.hpp"
#include "lambdalab/witness.hpp"

namespace lambdalab {

/*
 * Pieces J_1, J_2, ... of a witness with power-of-two levels 2^-kappa_n.
 * Pieces are short enough that, for every x in `window`, at most one λ puts
 * x + λ in a given piece. Piece n (1-based) is the sampler index.
 */
struct RefinedPartition {
    std::vector<DyadicInterval> intervals;
    std::vector<std::int64_t> kappas;
    PiecewiseWitness source;
    std::int64_t K = 0;
    DyadicInterval window{Dyadic(0), Dyadic(1)};
    std::uint64_t provenance_hash = 0; // FNV-1a over source blocks, K and window

    [[nodiscard]] std::size_t size() const noexcept { return intervals.size(); }
    // 1-based index of the piece containing x.
    [[nodiscard]] std::optional<std::uint64_t> find(const Dyadic& x) const;
    [[nodiscard]] Dyadic level(std::uint64_t n) const { return Dyadic::pow2(-kappas.at(n - 1)); }
};

inline constexpr std::size_t kMaxPartitionPieces = std::size_t{1} << 24;

// Splits each block of f3 into 2^t equal pieces, t minimal with piece length below
// the smallest gap of Λ over the block's reachable range [lo - window.hi, hi - window.lo].
RefinedPartition refine_partition(const PiecewiseWitness& f3, const LambdaSet& set, std::int64_t K,
    const DyadicInterval& window);

struct RandomWitness {
    const RefinedPartition* partition;
    std::uint64_t seed;
};

// X_n = bernoulli(seed, n, 2^-kappa_n).
bool piece_value(const RefinedPartition& p, std::uint64_t seed, std::uint64_t n);
// g(x) = X_n on J_n, 0 off the partition.
int g_eval(const RandomWitness& w, const Dyadic& x);

// The λ <= λ_max that put x + λ into some piece, in increasing order; seed independent.
struct Reach {
    std::vector<Dyadic> lambdas;
    std::vector<std::uint64_t> pieces;
};
Reach reach(const RefinedPartition& p, const LambdaSet& set, const Dyadic& x, const Dyadic& lambda_max);

struct HitStats {
    std::uint64_t hits = 0; // #{λ <= λ_max : g(x + λ) = 1}
    Dyadic expected;        // Σ_{λ <= λ_max} f3(x + λ)
    std::uint64_t terms = 0;
};
HitStats hit_statistics(const RandomWitness& w, const LambdaSet& set, const Dyadic& x, const Dyadic& lambda_max);

struct EnsembleRow {
    std::uint64_t seed;
    char side; // 'C' or 'D'
    Dyadic x;
    Dyadic horizon;
    std::uint64_t hits;
    Dyadic expected;
};

struct PointSummary {
    char side;
    Dyadic x;
    Dyadic expected;       // at the last horizon
    double mean_hits = 0.0; // at the last horizon, over seeds
    double stabilized = 0.0; // share of seeds with no new hit over the last half of horizons
};

struct PieceFrequency {
    std::uint64_t n;
    std::int64_t kappa;
    std::uint64_t ones = 0;
    double frequency = 0.0;
};

struct EnsembleReport {
    std::vector<EnsembleRow> rows; // ordered by seed, then C grid, then D grid, then horizon
    std::vector<PointSummary> points;
    std::vector<PieceFrequency> pieces;
    std::size_t seed_count = 0;
};

EnsembleReport ensemble_report(const RefinedPartition& p, const LambdaSet& set, const std::vector<std::uint64_t>& seeds,
    const std::vector<Dyadic>& c_grid, const std::vector<Dyadic>& d_grid, const std::vector<Dyadic>& horizons,
    unsigned threads = 1);

/*
 * Lacunary demo: Λ = {2^j : 0 <= j <= J} and the witness with level 1/2 on
 * [2^j, 2^j + 1/2) and 2^-(j+2) on [2^j + 1/2, 2^j + 1). Translates from
 * [0, 1/2) collect 1/2 per point and diverge; translates from [1/2, 1) collect
 * at most Σ 2^-(j+2) < 1/2.
 */
struct LacunaryDemo {
    LambdaSet set;
    PiecewiseWitness witness;
    std::int64_t K;
    DyadicInterval window; // [-K, K + 1): covers the closed grid on [-K, K]
    std::vector<Dyadic> c_grid; // 1/2 + i/32, i < 10
    std::vector<Dyadic> d_grid; // i/32, i < 10
    std::vector<Dyadic> horizons; // 2^0 .. 2^J
};

LacunaryDemo make_lacunary_demo(int J = 16, std::int64_t K = 1);

} // namespace lambdalab
