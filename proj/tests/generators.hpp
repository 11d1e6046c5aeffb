// Hand-rolled generators for property tests.
#pragma once

#include <random>
#include <vector>

#include "lambdalab/witness.hpp"

namespace gen {

// Sorted, disjoint blocks in [lo, hi) on the 2^-res grid, levels m / 2^4 with 1 <= m <= max_m.
inline lambdalab::PiecewiseWitness step_function(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi, int res,
    int max_blocks, std::int64_t max_m = 48)
{
    using lambdalab::Dyadic;
    const std::int64_t cells = (hi - lo) << res;
    std::vector<std::int64_t> cuts;
    const int n = 1 + static_cast<int>(rng() % static_cast<std::uint64_t>(max_blocks));
    for (int i = 0; i < 2 * n; ++i)
        cuts.push_back(static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(cells + 1)));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<lambdalab::WitnessBlock> blocks;
    for (std::size_t i = 0; i + 1 < cuts.size(); i += 2) {
        const Dyadic a = Dyadic(lo) + Dyadic(static_cast<lambdalab::i128>(cuts[i]), res);
        const Dyadic b = Dyadic(lo) + Dyadic(static_cast<lambdalab::i128>(cuts[i + 1]), res);
        const auto m = 1 + static_cast<std::int64_t>(rng() % static_cast<std::uint64_t>(max_m));
        blocks.push_back({lambdalab::DyadicInterval(a, b), Dyadic(static_cast<lambdalab::i128>(m), 4)});
    }
    return lambdalab::PiecewiseWitness(std::move(blocks));
}

inline std::vector<lambdalab::Dyadic> grid(std::int64_t lo, std::int64_t hi, int res, bool closed = true)
{
    std::vector<lambdalab::Dyadic> g;
    for (std::int64_t i = lo << res; i < (hi << res) + (closed ? 1 : 0); ++i)
        g.emplace_back(static_cast<lambdalab::i128>(i), res);
    return g;
}

} // namespace gen
