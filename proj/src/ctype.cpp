#include "lambdalab/ctype.hpp"

#include <algorithm>
#include <cmath>

#include "lambdalab/parallel.hpp"

namespace lambdalab {

SummableVerdict summable_weights_check(const WeightSeq& c, const Dyadic& f_bound)
{
    if (f_bound.is_negative())
        throw InvalidArgument("f_bound must be >= 0");
    SummableVerdict v;
    if (const auto total = c.tail_bound(0)) {
        v.everywhere_convergent = true;
        v.bound = Fraction{f_bound * total->num, total->den};
    }
    return v;
}

namespace {

// Ranks of Λ ∩ [lo, hi], both ends closed.
std::pair<std::uint64_t, std::uint64_t> closed_ranks(const LambdaSet& set, const Dyadic& lo, const Dyadic& hi)
{
    const std::uint64_t first = set.count_before(lo) + 1;
    const std::uint64_t last = set.count_before(hi) + (set.contains(hi) ? 1 : 0);
    return {first, last};
}

Dyadic min_weight(const WeightSeq& c, std::uint64_t first, std::uint64_t last)
{
    if (c.rule() != WeightSeq::Rule::Table)
        return c.at(last); // nonincreasing rules
    Dyadic m = c.at(first);
    for (std::uint64_t j = first + 1; j <= last; ++j)
        m = std::min(m, c.at(j));
    return m;
}

} // namespace

AlphaTransfer alpha_transfer(const PiecewiseWitness& f, const LambdaSet& set, const WeightSeq& c,
    const DyadicInterval& d_window)
{
    if (!f.is_characteristic())
        throw InvalidArgument("alpha_transfer needs a characteristic witness");
    if (!set.is_dyadic())
        throw InvalidArgument("alpha_transfer needs a dyadic set");
    AlphaTransfer out;
    std::vector<WitnessBlock> blocks;
    for (const auto& b : f.blocks()) {
        // x + λ in [lo, hi) with x in [d_lo, d_hi) forces λ in (lo - d_hi, hi - d_lo).
        auto [first, last] = closed_ranks(set, b.interval.lo() - d_window.hi(), b.interval.hi() - d_window.lo());
        Dyadic alpha(1);
        if (first <= last) {
            const Dyadic m = min_weight(c, first, last);
            alpha = Dyadic::pow2(-m.floor_log2());
        }
        out.blocks.push_back({b.interval, first, last, alpha});
        blocks.push_back({b.interval, alpha});
    }
    out.g = PiecewiseWitness(std::move(blocks), f.defined_below());
    return out;
}

std::vector<TransferRow> verify_transfer(const AlphaTransfer& t, const LambdaSet& set, const WeightSeq& c,
    const std::vector<Dyadic>& grid)
{
    std::vector<TransferRow> rows;
    for (const auto& x : grid) {
        for (std::size_t k = 0; k < t.blocks.size(); ++k) {
            const auto& b = t.blocks[k];
            TransferRow row{x, k, Dyadic(0), Dyadic(0), true};
            set.for_each(DyadicInterval(b.interval.lo() - x, b.interval.hi() - x), [&](const IndexedPoint& p) {
                row.weighted += c.at(p.rank) * b.alpha;
                row.unweighted += Dyadic(1);
            });
            row.ok = row.unweighted <= row.weighted;
            rows.push_back(row);
        }
    }
    return rows;
}

FastDecrReport check_fast_decr(const WeightSeq& c, std::uint64_t N)
{
    if (N < 1)
        throw InvalidArgument("check_fast_decr needs N >= 1");
    FastDecrReport rep;
    const std::uint64_t top = c.length() ? std::min(N, *c.length()) : N;
    for (std::uint64_t n = 1; n <= top; ++n) {
        FastDecrRow row{n, c.tail_bound(n), c.at(n).scaled(-static_cast<std::int64_t>(n)), false};
        row.holds = row.tail && compare(*row.tail, row.rhs) < 0;
        if (!row.holds && !rep.first_failure)
            rep.first_failure = n;
        rep.rows.push_back(row);
    }
    return rep;
}

RangeSum CTypeConstruction::t_sum(std::size_t n) const
{
    const auto& b = blocks.at(n - 1);
    return RangeSum(weights, b.t_first, b.t_last);
}

RangeSum CTypeConstruction::r_sum(std::size_t n, const Dyadic& x) const
{
    const Dyadic& y = blocks.at(n - 1).y;
    const Dyadic lo = y - x;
    const Dyadic hi = lo + Dyadic(1);
    if (hi.is_negative())
        return RangeSum(weights, 1, 0);
    auto [first, last] = closed_ranks(set, lo, hi);
    return RangeSum(weights, first, last);
}

std::optional<std::size_t> CTypeConstruction::block_at(const Dyadic& x) const
{
    auto it = std::upper_bound(
        blocks.begin(), blocks.end(), x, [](const Dyadic& v, const CTypeBlock& b) { return v < b.y; });
    if (it == blocks.begin())
        return std::nullopt;
    --it;
    if (it->y + Dyadic(1) < x)
        return std::nullopt;
    return static_cast<std::size_t>(it - blocks.begin()) + 1;
}

CTypeConstruction build_construction(const LambdaSet& set, const WeightSeq& c, std::size_t n_blocks,
    AnchorStrategy strategy, int grid_exponent)
{
    if (!set.is_dyadic())
        throw InvalidArgument("build_construction needs a dyadic set");
    if (strategy == AnchorStrategy::Grid && (grid_exponent < 1 || grid_exponent > 60))
        throw InvalidArgument("grid exponent must lie in [1, 60]");
    CTypeConstruction con{set, c, {}, strategy, grid_exponent};
    const Dyadic half(1, 1);
    const Dyadic step = Dyadic::pow2(-grid_exponent);
    std::optional<Dyadic> prev;
    for (std::size_t n = 1; n <= n_blocks; ++n) {
        Dyadic y;
        if (strategy == AnchorStrategy::Lambda) {
            const auto lam = prev ? set.first_from(*prev + Dyadic(1), true) : set.point_at(1);
            if (!lam)
                throw InsufficientLambda("set exhausted before block " + std::to_string(n));
            y = *lam;
        } else {
            if (!prev) {
                const auto lam = set.point_at(1);
                if (!lam)
                    throw InsufficientLambda("set is empty");
                y = ceil_to_grid(*lam - half, grid_exponent);
            } else {
                const Dyadic start = *prev + Dyadic(1) + step;
                const auto lam = set.first_from(start);
                if (!lam)
                    throw InsufficientLambda("set exhausted before block " + std::to_string(n));
                y = *lam <= start + half ? start : ceil_to_grid(*lam - half, grid_exponent);
            }
        }
        const auto [first, last] = closed_ranks(set, y, y + half);
        if (first > last)
            throw InsufficientLambda("no point in [y, y + 1/2] at block " + std::to_string(n));
        con.blocks.push_back({y, first, last, 0.0});
        con.blocks.back().log2_d = -log2_approx(RangeSum(con.weights, first, last));
        prev = y;
    }
    return con;
}

namespace {

enum class Side { Divergence, Convergence };

ClaimReport verify_claim(const CTypeConstruction& con, const std::vector<Dyadic>& grid, std::size_t N, Side side,
    unsigned threads)
{
    if (N > con.blocks.size())
        throw InvalidArgument("construction has only " + std::to_string(con.blocks.size()) + " blocks");
    for (const auto& x : grid) {
        const bool in_range = side == Side::Divergence ? (!x.is_negative() && x <= Dyadic(1, 1)) : x < Dyadic(-1, 1);
        if (!in_range)
            throw InvalidArgument("grid point " + x.to_string() + " outside the claim's range");
    }
    std::vector<std::vector<ClaimRow>> per_x(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        const Dyadic& x = grid[i];
        double partial = 0.0;
        for (std::size_t n = 1; n <= N; ++n) {
            const RangeSum R = con.r_sum(n, x);
            const RangeSum T = con.t_sum(n);
            ClaimRow row{x, n, ratio_approx(R, T), log2_approx(R) - log2_approx(T), 0.0, "", false};
            if (side == Side::Divergence) {
                row.ok = compare(R, 0, T) >= 0;
                row.bound = ">= 1";
            } else {
                row.ok = compare(R, static_cast<std::int64_t>(n), T) < 0;
                row.bound = "< 2^-" + std::to_string(n);
            }
            partial += row.block_contribution;
            row.partial = partial;
            per_x[i].push_back(row);
        }
    });
    ClaimReport rep;
    for (auto& rows : per_x) {
        for (auto& row : rows) {
            if (!row.ok && rep.all_ok) {
                rep.all_ok = false;
                rep.first_violation = "x = " + row.x.to_string() + ", n = " + std::to_string(row.n) + ": block "
                    + (side == Side::Divergence ? "below 1" : "not below 2^-n");
            }
            rep.rows.push_back(std::move(row));
        }
    }
    return rep;
}

} // namespace

ClaimReport verify_claim_divergence(const CTypeConstruction& con, const std::vector<Dyadic>& grid, std::size_t N,
    unsigned threads)
{
    return verify_claim(con, grid, N, Side::Divergence, threads);
}

ClaimReport verify_claim_convergence(const CTypeConstruction& con, const std::vector<Dyadic>& grid, std::size_t N,
    unsigned threads)
{
    return verify_claim(con, grid, N, Side::Convergence, threads);
}

CTypeTrajectory ctype_trajectory(const CTypeConstruction& con, const Dyadic& x, std::size_t N)
{
    if (N > con.blocks.size())
        throw InvalidArgument("construction has only " + std::to_string(con.blocks.size()) + " blocks");
    CTypeTrajectory tr;
    double partial = 0.0;
    for (std::size_t n = 1; n <= N; ++n) {
        partial += ratio_approx(con.r_sum(n, x), con.t_sum(n));
        tr.partials.push_back(partial);
    }
    tr.label = classify_partials(tr.partials, ClassifyThresholds::floating());
    return tr;
}

} // namespace lambdalab
