#include <doctest.h>

#include <random>

#include "lambdalab/density.hpp"
#include "oracles.hpp"

using namespace lambdalab;

namespace {

DyadicSet make(std::initializer_list<std::pair<Dyadic, Dyadic>> ivs)
{
    std::vector<DyadicInterval> v;
    for (const auto& [a, b] : ivs)
        v.emplace_back(a, b);
    return DyadicSet(std::move(v));
}

// Direct enumeration of the 2^-n grid points of x + 2^n Z inside [0, 1).
std::uint64_t count_q(const DyadicSet& C, const Dyadic& x, std::int64_t n)
{
    const mpq_class step = oracle::pow2(n);
    mpq_class p = oracle::q(x);
    while (p >= step)
        p -= step;
    std::uint64_t c = 0;
    for (; p < 1; p += step) {
        for (const auto& J : C.intervals())
            c += (oracle::q(J.lo()) <= p && p < oracle::q(J.hi())) ? 1 : 0;
    }
    return c;
}

DyadicSet random_set(std::mt19937_64& rng, int res)
{
    std::vector<std::int64_t> cuts;
    const int n = 1 + static_cast<int>(rng() % 6);
    for (int i = 0; i < 2 * n; ++i)
        cuts.push_back(static_cast<std::int64_t>(rng() % ((1ULL << res) + 1)));
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<DyadicInterval> v;
    for (std::size_t i = 0; i + 1 < cuts.size(); i += 2)
        v.emplace_back(Dyadic(static_cast<i128>(cuts[i]), res), Dyadic(static_cast<i128>(cuts[i + 1]), res));
    return DyadicSet(std::move(v));
}

} // namespace

TEST_CASE("translate counts: fixed cases")
{
    const DyadicSet half = make({{Dyadic(0), Dyadic(1, 1)}});
    const TranslateCount t = translate_count(half, Dyadic(1, 4), -3);
    CHECK(t.count == 4);
    CHECK(t.scaled == Dyadic(1, 1));
    CHECK(translate_count(half, Dyadic(0), -1).count == 1);
    const DyadicSet full = make({{Dyadic(0), Dyadic(1)}});
    for (std::int64_t n = 0; n >= -12; --n)
        CHECK(translate_count(full, Dyadic(3, 7), n).scaled == Dyadic(1));
    CHECK(translate_count(DyadicSet(), Dyadic(1, 3), -5).count == 0);
    // Coarser than the resolution: the single grid point 1/8 + Z misses [0, 1/4)? No, it hits.
    const DyadicSet quarter = make({{Dyadic(0), Dyadic(1, 2)}});
    CHECK(translate_count(quarter, Dyadic(1, 3), -1).count == 1);
    CHECK(translate_count(quarter, Dyadic(3, 3), -1).count == 0);
    CHECK_THROWS_AS(translate_count(half, Dyadic(1), -1), InvalidArgument);
    CHECK_THROWS_AS(translate_count(half, Dyadic(0), 1), InvalidArgument);
    CHECK_THROWS_AS(make({{Dyadic(1, 1), Dyadic(1)}, {Dyadic(0), Dyadic(3, 2)}}), InvalidArgument);
}

TEST_CASE("density profile")
{
    const DyadicSet C = make({{Dyadic(0), Dyadic(1, 1)}, {Dyadic(3, 2), Dyadic(7, 3)}});
    CHECK(C.measure() == Dyadic(5, 3));
    CHECK(C.resolution() == 3);
    const DensityProfile prof = density_profile(C, Dyadic(1, 5), {-1, -2, -3, -4, -5, -6, -7, -8});
    for (const auto& row : prof.rows) {
        if (row.n <= -5)
            CHECK(row.scaled == Dyadic(5, 3));
        CHECK(row.guaranteed == (-row.n >= 3));
        if (row.guaranteed)
            CHECK(row.exact);
    }
    REQUIRE(prof.first_exact);
    CHECK(*prof.first_exact == -3);
    CHECK_THROWS_AS(density_profile(C, Dyadic(0), {-1, -1}), InvalidArgument);
}

TEST_CASE("exactness at or past the resolution, for any x")
{
    std::mt19937_64 rng(13);
    for (int t = 0; t < 300; ++t) {
        const int res = 1 + static_cast<int>(rng() % 7);
        const DyadicSet C = random_set(rng, res);
        const Dyadic x(static_cast<i128>(rng() % (1ULL << 20)), 20);
        for (std::int64_t n = 0; n >= -9; --n) {
            const TranslateCount tc = translate_count(C, x, n);
            CHECK(tc.count == count_q(C, x, n));
            CHECK(tc.scaled == Dyadic(static_cast<std::int64_t>(tc.count)).scaled(n));
            if (-n >= res)
                CHECK(tc.scaled == C.measure());
        }
    }
}

TEST_CASE("periodicity and refinement bound")
{
    std::mt19937_64 rng(14);
    for (int t = 0; t < 200; ++t) {
        const DyadicSet C = random_set(rng, 8);
        const std::int64_t n = -static_cast<std::int64_t>(rng() % 8);
        const Dyadic x(static_cast<i128>(rng() % 4096), 12);
        const std::uint64_t base = translate_count(C, x, n).count;
        for (std::int64_t k = 1; k < 5; ++k) {
            Dyadic y = x + Dyadic(k).scaled(n);
            y = y - Dyadic(y.floor_int());
            CHECK(translate_count(C, y, n).count == base);
        }
        CHECK(translate_count(C, x, n - 1).count <= 2 * base + 2 * C.intervals().size());
    }
}
