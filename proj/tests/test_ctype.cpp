#include <doctest.h>

#include <random>

#include "generators.hpp"
#include "lambdalab/ctype.hpp"
#include "oracles.hpp"

using namespace lambdalab;

namespace {

mpq_class weight_q(const WeightSeq& c, std::uint64_t j)
{
    if (c.rule() == WeightSeq::Rule::SuperExp)
        return oracle::pow2(-static_cast<long>(j * j));
    return oracle::q(c.at(j));
}

struct OracleBlock {
    mpq_class y;
    std::size_t first, last; // 1-based ranks
};

// y_1 = λ_1, y_{n+1} = first λ > y_n + 1; T_n = ranks in [y_n, y_n + 1/2].
std::vector<OracleBlock> oracle_blocks(const std::vector<mpq_class>& pts, std::size_t N)
{
    std::vector<OracleBlock> out;
    mpq_class y = pts[0];
    for (std::size_t n = 0; n < N; ++n) {
        if (n > 0) {
            std::size_t i = 0;
            while (!(pts[i] > out.back().y + 1))
                ++i;
            y = pts[i];
        }
        OracleBlock b{y, 0, 0};
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i] >= y && pts[i] <= y + mpq_class(1, 2)) {
                if (b.first == 0)
                    b.first = i + 1;
                b.last = i + 1;
            }
        }
        out.push_back(b);
    }
    return out;
}

// d_n Σ_{x + λ_j in [y_n, y_n + 1]} c_j as an exact rational.
mpq_class block_q(const std::vector<mpq_class>& pts, const WeightSeq& c, const OracleBlock& b, const mpq_class& x)
{
    mpq_class t = 0, r = 0;
    for (std::size_t j = b.first; j <= b.last; ++j)
        t += weight_q(c, j);
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const mpq_class v = x + pts[i];
        if (v >= b.y && v <= b.y + 1)
            r += weight_q(c, i + 1);
    }
    return r / t;
}

} // namespace

TEST_CASE("summable weights")
{
    const SummableVerdict g = summable_weights_check(WeightSeq::geometric(Dyadic(1, 1)), Dyadic(1));
    REQUIRE(g.everywhere_convergent);
    CHECK(compare(*g.bound, Dyadic(1)) == 0);
    CHECK_FALSE(summable_weights_check(WeightSeq::ones(), Dyadic(1)).everywhere_convergent);
    CHECK(compare(*summable_weights_check(WeightSeq::superexp(), Dyadic(0)).bound, Dyadic(0)) == 0);
    CHECK_THROWS_AS(summable_weights_check(WeightSeq::ones(), Dyadic(-1)), InvalidArgument);
}

TEST_CASE("fast decay")
{
    const FastDecrReport s = check_fast_decr(WeightSeq::superexp(), 30);
    CHECK(s.holds());
    CHECK(s.rows.size() == 30);
    const FastDecrReport q = check_fast_decr(WeightSeq::geometric(Dyadic(1, 2)), 10);
    REQUIRE(q.first_failure);
    CHECK(*q.first_failure == 2);
    CHECK(q.rows[0].holds);
    // Oracle: tail 4^-3 / (3/4) = 1/48 against 2^-2 · 4^-2 = 1/64.
    CHECK(oracle::q(q.rows[1].tail->num) / oracle::q(q.rows[1].tail->den) == mpq_class(1, 48));
    CHECK(oracle::q(q.rows[1].rhs) == mpq_class(1, 64));
    CHECK(*check_fast_decr(WeightSeq::ones(), 5).first_failure == 1);
    CHECK_THROWS_AS(check_fast_decr(WeightSeq::ones(), 0), InvalidArgument);
}

TEST_CASE("fast decay against exact tails")
{
    // Finite tables: the tail is an exact finite sum.
    std::mt19937_64 rng(17);
    for (int t = 0; t < 100; ++t) {
        std::vector<Dyadic> v;
        const int len = 2 + static_cast<int>(rng() % 10);
        for (int i = 0; i < len; ++i)
            v.emplace_back(static_cast<i128>(1 + rng() % 7), static_cast<std::int64_t>(3 * i + rng() % 3));
        const FastDecrReport rep = check_fast_decr(WeightSeq::table(v), 20);
        for (const auto& row : rep.rows) {
            mpq_class tail = 0;
            for (std::size_t j = row.n; j < v.size(); ++j)
                tail += oracle::q(v[j]);
            CHECK(row.holds == (tail < oracle::q(v[row.n - 1]) * oracle::pow2(-static_cast<long>(row.n))));
        }
    }
}

TEST_CASE("alpha transfer")
{
    const LambdaSet L = LambdaSet::ladder();
    const auto f = PiecewiseWitness({{DyadicInterval(Dyadic(2), Dyadic(5, 1)), Dyadic(1)},
        {DyadicInterval(Dyadic(4), Dyadic(5)), Dyadic(1)}});
    const DyadicInterval D(Dyadic(0), Dyadic(1, 1));
    const AlphaTransfer ones = alpha_transfer(f, L, WeightSeq::ones(), D);
    CHECK(ones.g == f);
    // Relevant ranks for [2, 5/2) are those in [3/2, 5/2]: 2..5, so min c = 2^-5.
    const WeightSeq geo = WeightSeq::geometric(Dyadic(1, 1));
    const AlphaTransfer a = alpha_transfer(f, L, geo, D);
    CHECK(a.blocks[0].first == 2);
    CHECK(a.blocks[0].last == 5);
    CHECK(a.blocks[0].alpha == Dyadic(32));
    for (const auto& row : verify_transfer(a, L, geo, gen::grid(0, 1, 6, false))) {
        if (row.x < D.hi())
            CHECK(row.ok);
    }
    CHECK_THROWS_AS(alpha_transfer(PiecewiseWitness::indicator(D, Dyadic(1, 1)), L, geo, D), InvalidArgument);
}

TEST_CASE("alpha transfer against brute force")
{
    std::mt19937_64 rng(18);
    const LambdaSet L = LambdaSet::ladder(4);
    const auto pts = oracle::ladder_points(4);
    const WeightSeq geo = WeightSeq::geometric(Dyadic(3, 2));
    for (int t = 0; t < 20; ++t) {
        auto blocks = gen::step_function(rng, 1, 5, 3, 4).blocks();
        for (auto& b : blocks)
            b.level = Dyadic(1);
        const PiecewiseWitness f(std::move(blocks));
        const DyadicInterval D(Dyadic(-1), Dyadic(1, 1));
        const AlphaTransfer a = alpha_transfer(f, L, geo, D);
        const auto rows = verify_transfer(a, L, geo, gen::grid(-1, 0, 4));
        for (const auto& row : rows) {
            const auto& I = a.blocks[row.k].interval;
            mpq_class weighted = 0, unweighted = 0;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                const mpq_class v = oracle::q(row.x) + pts[i];
                if (oracle::q(I.lo()) <= v && v < oracle::q(I.hi())) {
                    mpq_class c = 1;
                    for (std::size_t j = 0; j <= i; ++j)
                        c *= mpq_class(3, 4);
                    weighted += oracle::q(a.blocks[row.k].alpha) * c;
                    unweighted += 1;
                }
            }
            CHECK(oracle::q(row.weighted) == weighted);
            CHECK(oracle::q(row.unweighted) == unweighted);
            CHECK(row.ok);
        }
    }
}

TEST_CASE("construction on the ladder")
{
    const LambdaSet L = LambdaSet::ladder();
    const WeightSeq c = WeightSeq::superexp();
    const CTypeConstruction con = build_construction(L, c, 6);
    const auto want = oracle_blocks(oracle::ladder_points(10), 6);
    REQUIRE(con.blocks.size() == 6);
    for (std::size_t n = 0; n < 6; ++n) {
        CHECK(oracle::q(con.blocks[n].y) == want[n].y);
        CHECK(con.blocks[n].t_first == want[n].first);
        CHECK(con.blocks[n].t_last == want[n].last);
        if (n > 0)
            CHECK(con.blocks[n].y - con.blocks[n - 1].y > Dyadic(1));
    }
    CHECK(con.blocks[0].y == Dyadic(1));
    CHECK(con.blocks[1].y == Dyadic(9, 2));
    CHECK(con.block_at(Dyadic(2)) == 1u);
    CHECK(!con.block_at(Dyadic(17, 3)));
    CHECK_THROWS_AS(build_construction(LambdaSet::ladder(3), c, 10), InsufficientLambda);
    CHECK_THROWS_AS(build_construction(LambdaSet::log_integers(10), c, 2), InvalidArgument);
}

TEST_CASE("grid anchors keep the invariants")
{
    for (const int G : {1, 2, 4, 8}) {
        const LambdaSet L = LambdaSet::ladder();
        const CTypeConstruction con = build_construction(L, WeightSeq::superexp(), 12, AnchorStrategy::Grid, G);
        for (std::size_t n = 0; n < con.blocks.size(); ++n) {
            const auto& b = con.blocks[n];
            CHECK(b.y.exponent() <= G);
            CHECK(b.t_first <= b.t_last);
            CHECK(L.count_closed(b.y, b.y + Dyadic(1, 1)) == b.t_last - b.t_first + 1);
            if (n > 0)
                CHECK(b.y - con.blocks[n - 1].y > Dyadic(1));
        }
    }
}

TEST_CASE("claims agree with an exact rational oracle")
{
    const LambdaSet L = LambdaSet::ladder();
    const auto pts = oracle::ladder_points(9);
    for (const auto& c : {WeightSeq::superexp(), WeightSeq::geometric(Dyadic(1, 2)), WeightSeq::ones()}) {
        const std::size_t N = 4;
        const CTypeConstruction con = build_construction(L, c, N);
        const auto blocks = oracle_blocks(pts, N);
        std::vector<Dyadic> dg;
        for (std::int64_t i = 0; i <= 8; ++i)
            dg.emplace_back(static_cast<i128>(i), 4);
        const ClaimReport d = verify_claim_divergence(con, dg, N);
        for (const auto& row : d.rows) {
            const mpq_class v = block_q(pts, c, blocks[row.n - 1], oracle::q(row.x));
            CHECK(row.ok == (v >= 1));
            CHECK(row.block_contribution == doctest::Approx(v.get_d()).epsilon(1e-12));
        }
        std::vector<Dyadic> cg;
        for (std::int64_t i = 0; i <= 8; ++i)
            cg.push_back(Dyadic(-4) + Dyadic(static_cast<i128>(3 * i), 3));
        const ClaimReport v = verify_claim_convergence(con, cg, N);
        for (const auto& row : v.rows) {
            const mpq_class b = block_q(pts, c, blocks[row.n - 1], oracle::q(row.x));
            CHECK(row.ok == (b < oracle::pow2(-static_cast<long>(row.n))));
        }
    }
}

TEST_CASE("both claims hold for fast-decaying weights")
{
    const LambdaSet L = LambdaSet::ladder();
    const CTypeConstruction con = build_construction(L, WeightSeq::superexp(), 20);
    std::vector<Dyadic> dg, cg;
    for (std::int64_t i = 0; i <= 8; ++i) {
        dg.emplace_back(static_cast<i128>(i), 4);
        cg.push_back(Dyadic(-4) + Dyadic(static_cast<i128>(3 * i), 3));
    }
    const ClaimReport d = verify_claim_divergence(con, dg, 20, 3);
    CHECK(d.all_ok);
    for (const auto& row : d.rows)
        CHECK(row.partial >= static_cast<double>(row.n));
    const ClaimReport v = verify_claim_convergence(con, cg, 20, 3);
    CHECK(v.all_ok);
    for (const auto& row : v.rows)
        CHECK(row.partial < 1.0);
    const ClaimReport d1 = verify_claim_divergence(con, dg, 20, 1);
    REQUIRE(d1.rows.size() == d.rows.size());
    for (std::size_t i = 0; i < d.rows.size(); ++i)
        CHECK(d1.rows[i].log2_contribution == d.rows[i].log2_contribution);
    CHECK_THROWS_AS(verify_claim_divergence(con, {Dyadic(1)}, 5), InvalidArgument);
    CHECK_THROWS_AS(verify_claim_convergence(con, {Dyadic(-1, 1)}, 5), InvalidArgument);
    CHECK_THROWS_AS(verify_claim_convergence(con, cg, 21), InvalidArgument);

    CHECK(ctype_trajectory(con, Dyadic(1, 1), 20).label == SumLabel::Divergent);
    CHECK(ctype_trajectory(con, Dyadic(-3, 1), 20).label == SumLabel::Convergent);
}
