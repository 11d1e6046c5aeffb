#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "generators.hpp"
#include "lambdalab/witness.hpp"
#include "oracles.hpp"

using namespace lambdalab;

namespace {

mpq_class eval_q(const PiecewiseWitness& f, const mpq_class& x)
{
    for (const auto& b : f.blocks()) {
        if (oracle::q(b.interval.lo()) <= x && x < oracle::q(b.interval.hi()))
            return oracle::q(b.level);
    }
    return 0;
}

// Σ_{λ_n <= λ_max} c_n f(x + λ_n) straight from the point list.
mpq_class sum_q(const PiecewiseWitness& f, const std::vector<mpq_class>& pts, const std::vector<mpq_class>& c,
    const mpq_class& x, const mpq_class& lambda_max)
{
    mpq_class s = 0;
    for (std::size_t i = 0; i < pts.size() && pts[i] <= lambda_max; ++i)
        s += c[i] * eval_q(f, x + pts[i]);
    return s;
}

const DyadicInterval unit(Dyadic(0), Dyadic(1));

} // namespace

TEST_CASE("evaluation")
{
    const auto f = PiecewiseWitness::indicator(unit);
    CHECK(eval_witness(f, Dyadic(0)) == Dyadic(1));
    CHECK(eval_witness(f, Dyadic(1)) == Dyadic(0));
    CHECK(eval_witness(f, Dyadic(-1)) == Dyadic(0));
    CHECK_THROWS_AS(PiecewiseWitness({{unit, Dyadic(1)}, {DyadicInterval(Dyadic(1, 1), Dyadic(2)), Dyadic(1)}}),
        InvalidArgument);
    CHECK_THROWS_AS(PiecewiseWitness({{unit, Dyadic(0)}}), InvalidArgument);
}

TEST_CASE("generator snapshots")
{
    // Block i: [2i, 2i + 1) at level 2^-i.
    const WitnessGenerator gen([](std::uint64_t i) -> std::optional<WitnessBlock> {
        const auto a = static_cast<std::int64_t>(2 * i);
        return WitnessBlock{DyadicInterval(Dyadic(a), Dyadic(a + 1)), Dyadic::pow2(-static_cast<std::int64_t>(i))};
    });
    const PiecewiseWitness f = gen.snapshot(Dyadic(9, 1));
    CHECK(f.blocks().size() == 3);
    CHECK(f.blocks().back().interval.hi() == Dyadic(9, 1));
    CHECK(f.eval(Dyadic(4)) == Dyadic(1, 2));
    CHECK_THROWS_AS((void)f.eval(Dyadic(5)), GeneratorExhausted);
    CHECK_THROWS_AS(partial_sum(f, LambdaSet::ladder(), WeightSeq::ones(), Dyadic(0), Dyadic(5)), GeneratorExhausted);
}

TEST_CASE("partial sums: fixed cases")
{
    const LambdaSet L = LambdaSet::ladder();
    const auto ones = WeightSeq::ones();
    // Λ̃ has no point in [0, 1).
    CHECK(partial_sum(PiecewiseWitness::indicator(unit), L, ones, Dyadic(0), Dyadic(1) - Dyadic::pow2(-10)).value
        == Dyadic(0));
    const auto f12 = PiecewiseWitness::indicator(DyadicInterval(Dyadic(1), Dyadic(2)));
    const PartialSum s = partial_sum(f12, L, ones, Dyadic(0), Dyadic(2));
    CHECK(s.value == Dyadic(2));
    CHECK(s.terms == 2);
    CHECK(partial_sum(f12, L, ones, Dyadic(0), Dyadic(1, 1)).value == Dyadic(0));
    CHECK(partial_sum(f12, L, ones, Dyadic(0), Dyadic(1)).value == Dyadic(1)); // λ_max itself counts
}

TEST_CASE("partial sums agree with a brute-force oracle")
{
    std::mt19937_64 rng(21);
    const auto pts = oracle::ladder_points(5);
    const LambdaSet L = LambdaSet::ladder(5);
    std::vector<Dyadic> table;
    for (std::size_t i = 0; i < pts.size(); ++i)
        table.emplace_back(static_cast<i128>(1 + rng() % 15), 4);
    const WeightSeq tab = WeightSeq::table(table);
    const WeightSeq geo = WeightSeq::geometric(Dyadic(1, 1));
    for (int t = 0; t < 150; ++t) {
        const PiecewiseWitness f = gen::step_function(rng, -2, 8, 4, 6);
        const Dyadic x(static_cast<i128>(rng() % 64) - 32, 4);
        const Dyadic lmax(static_cast<i128>(rng() % (7 << 3)), 3);
        for (const auto* c : {&tab, &geo}) {
            std::vector<mpq_class> cq;
            for (std::size_t i = 0; i < pts.size(); ++i)
                cq.push_back(oracle::q(c->at(i + 1)));
            CHECK(oracle::q(partial_sum(f, L, *c, x, lmax).value) == sum_q(f, pts, cq, oracle::q(x), oracle::q(lmax)));
        }
        const std::vector<mpq_class> one(pts.size(), mpq_class(1));
        const PartialSum u = partial_sum(f, L, WeightSeq::ones(), x, lmax);
        CHECK(oracle::q(u.value) == sum_q(f, pts, one, oracle::q(x), oracle::q(lmax)));
        // The counting path and the per-point path agree exactly.
        CHECK(u.value == partial_sum(f, L, WeightSeq::table(std::vector<Dyadic>(pts.size(), Dyadic(1))), x, lmax).value);
        // Monotone in λ_max.
        CHECK(partial_sum(f, L, WeightSeq::ones(), x, lmax + Dyadic(1, 2)).value >= u.value);
    }
}

TEST_CASE("block order does not matter")
{
    std::mt19937_64 rng(33);
    const LambdaSet L = LambdaSet::ladder();
    for (int t = 0; t < 40; ++t) {
        const PiecewiseWitness f = gen::step_function(rng, 0, 8, 5, 8);
        std::vector<Dyadic> table;
        for (int i = 0; i < 300; ++i)
            table.emplace_back(static_cast<i128>(1 + rng() % 255), 8);
        const WeightSeq c = WeightSeq::table(table);
        const Dyadic whole = partial_sum(f, L, c, Dyadic(0), Dyadic(7)).value;
        std::vector<std::size_t> order(f.blocks().size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        Dyadic pieces(0);
        for (const auto i : order)
            pieces += partial_sum(PiecewiseWitness({f.blocks()[i]}), L, c, Dyadic(0), Dyadic(7)).value;
        CHECK(pieces == whole);
    }
}

TEST_CASE("binary64 sums over log integers")
{
    const LambdaSet S = LambdaSet::log_integers(5000);
    const auto f = PiecewiseWitness::indicator(DyadicInterval(Dyadic(3), Dyadic(5)), Dyadic(1, 1));
    const PartialSumReal r = partial_sum_real(f, S, WeightSeq::ones(), 0.25, 100.0);
    std::uint64_t n = 0;
    for (int k = 1; k <= 5000; ++k) {
        const double y = 0.25 + std::log(static_cast<double>(k));
        n += (y >= 3.0 && y < 5.0) ? 1 : 0;
    }
    CHECK(r.terms == n);
    CHECK(std::abs(r.value - 0.5 * n) <= r.error_bound + 1e-12);
}

TEST_CASE("trajectory labels")
{
    const LambdaSet L = LambdaSet::ladder();
    std::vector<Dyadic> hs;
    for (int h = 1; h <= 12; ++h)
        hs.emplace_back(h);
    const auto empty = classify_trajectory(PiecewiseWitness(), L, WeightSeq::ones(), Dyadic(0), hs);
    CHECK(empty.label == SumLabel::Convergent);
    for (const auto& p : empty.partials)
        CHECK(p == Dyadic(0));

    // Indicator of [0, ∞) restricted to the horizon: partial sums grow like 2^h.
    const auto big = PiecewiseWitness::indicator(DyadicInterval(Dyadic(0), Dyadic(64)));
    CHECK(classify_trajectory(big, L, WeightSeq::ones(), Dyadic(0), hs).label == SumLabel::Divergent);
    // Finite support: stagnates exactly.
    const auto small = PiecewiseWitness::indicator(DyadicInterval(Dyadic(1), Dyadic(3)));
    CHECK(classify_trajectory(small, L, WeightSeq::ones(), Dyadic(0), hs).label == SumLabel::Convergent);
    CHECK_THROWS_AS(classify_trajectory(small, L, WeightSeq::ones(), Dyadic(0), {Dyadic(2), Dyadic(1)}), InvalidArgument);

    CHECK(classify_partials(std::vector<double>{1, 2, 3}, ClassifyThresholds::floating()) == SumLabel::Undecided);
    CHECK(classify_partials(std::vector<double>{0.5, 0.75, 0.75, 0.75 + 1e-13}, ClassifyThresholds::floating())
        == SumLabel::Convergent);
}

TEST_CASE("regularization levels")
{
    const LambdaSet L = LambdaSet::ladder();
    const RegularizeResult r = regularize_f0(PiecewiseWitness(), L, 2, -4, 10);
    // k = 5: count over [2, 7) is 4 + 8 + 16 + 32 + 64 = 124, so ε_5 = 2^-5 · 2^-7.
    CHECK(r.levels[4].count == 124);
    CHECK(r.levels[4].eps == Dyadic::pow2(-12));
    for (const auto& lv : r.levels) {
        CHECK(lv.eps.is_power_of_two());
        CHECK(oracle::q(lv.eps) * std::max<std::uint64_t>(1, lv.count) <= oracle::pow2(-lv.k));
    }
    // f = 0: f0 is exactly the ε staircase.
    for (const auto& lv : r.levels)
        CHECK(r.f0.eval(lv.interval.lo()) == lv.eps);
    // Added mass at any x in [-K, K] stays below 1.
    for (const auto& x : gen::grid(-2, 2, 3)) {
        const Dyadic added = partial_sum(r.f0, L, WeightSeq::ones(), x, Dyadic(20)).value;
        CHECK(added < Dyadic(1));
    }
}

TEST_CASE("clip and quantize")
{
    const auto lv = [](const Dyadic& level) {
        return PiecewiseWitness::indicator(DyadicInterval(Dyadic(0), Dyadic(1)), level);
    };
    CHECK(clip_f1(lv(Dyadic(2))).blocks()[0].level == Dyadic(1));
    CHECK(clip_f1(lv(Dyadic(1, 1))).blocks()[0].level == Dyadic(1, 1));
    CHECK(quantize_f2(lv(Dyadic(3, 3))).blocks()[0].level == Dyadic(1, 2));
    CHECK(quantize_f2(lv(Dyadic(1))).blocks()[0].level == Dyadic(1, 1));
    CHECK(quantize_f2(lv(Dyadic::pow2(-7))).blocks()[0].level == Dyadic::pow2(-8));
    CHECK_THROWS_AS(quantize_f2(lv(Dyadic(3, 1))), InvalidArgument);
    const PiecewiseWitness n = quantize_f2(lv(Dyadic(3, 3)), true, -2);
    CHECK(n.eval(Dyadic(-1)) == Dyadic(1));
    CHECK(n.eval(Dyadic(1, 1)) == Dyadic(1, 2));
    std::mt19937_64 rng(44);
    for (int t = 0; t < 50; ++t) {
        const PiecewiseWitness f = gen::step_function(rng, -4, 8, 6, 10, 16);
        CHECK(clip_f1(f) == f.merged());
    }
}

TEST_CASE("pipeline sandwich and positivity")
{
    std::mt19937_64 rng(55);
    const LambdaSet L = LambdaSet::ladder();
    const auto xs = gen::grid(-4, 8, 7);
    for (int t = 0; t < 25; ++t) {
        const PiecewiseWitness f = gen::step_function(rng, -4, 8, 6, 12);
        const PiecewiseWitness f0 = regularize_f0(f, L, 2, -4, 8).f0;
        const PiecewiseWitness f1 = clip_f1(f0);
        const PiecewiseWitness f2 = quantize_f2(f1);
        for (const auto& x : xs) {
            const Dyadic v = f.eval(x), v0 = f0.eval(x), v1 = f1.eval(x), v2 = f2.eval(x);
            CHECK(v0 >= v);
            if (x < Dyadic(8))
                CHECK(v0.is_positive());
            CHECK(v1 <= Dyadic(1));
            if (v1.is_positive()) {
                CHECK(v1.scaled(-1) <= v2);
                CHECK(v2 < v1);
                CHECK(v2.is_power_of_two());
            }
        }
    }
}

TEST_CASE("simplification budget")
{
    const LambdaSet L = LambdaSet::ladder();
    CHECK(delta_k(L, 3, 2, DeltaRule::UnitMax) == Dyadic::pow2(-3 - 5));
    CHECK(delta_k(L, 3, 2, DeltaRule::Window2) == Dyadic::pow2(-3 - 5)); // #[3, 5) = 24 -> 2^5
    std::mt19937_64 rng(66);
    for (int t = 0; t < 30; ++t) {
        const PiecewiseWitness f2 = quantize_f2(clip_f1(gen::step_function(rng, 0, 6, 9, 10)));
        const SimplifyResult plain = simplify_f3(f2, L, 2, DeltaRule::UnitMax);
        CHECK(plain.f3 == f2.merged());
        const SimplifyResult snapped = simplify_f3(f2, L, 2, DeltaRule::UnitMax, 9);
        for (const auto& u : snapped.units) {
            CHECK(u.changed <= u.delta.scaled(1));
            // Measure of {f2 != f3} in [k-1, k) counted on the 2^-9 grid, where both are constant per cell.
            std::int64_t cells = 0;
            for (std::int64_t i = 0; i < 512; ++i) {
                const Dyadic x = Dyadic(u.k - 1) + Dyadic(static_cast<i128>(i), 9);
                cells += f2.eval(x) != snapped.f3.eval(x) ? 1 : 0;
            }
            CHECK(Dyadic(static_cast<i128>(cells), 9) == u.changed);
        }
    }
}

TEST_CASE("modification series")
{
    const LambdaSet L = LambdaSet::ladder();
    const ModificationReport fast = modification_series_check(L, EpsSchedule::parse("exp2:2"), 2, 30);
    CHECK(fast.verdict == SeriesVerdict::Summable);
    CHECK(fast.terms[5] == Dyadic::pow2(-2 * (5 - 2) + 5));
    const ModificationReport slow = modification_series_check(L, EpsSchedule::parse("exp2:1"), 2, 30);
    CHECK(slow.verdict == SeriesVerdict::Unknown);
    CHECK(slow.diverging_trend);
    for (std::size_t l = 1; l < slow.terms.size(); ++l)
        CHECK(slow.terms[l] == Dyadic(4));
    CHECK(modification_series_check(LambdaSet::ladder(6), EpsSchedule::parse("exp2:1"), 2, 30).verdict
        == SeriesVerdict::Summable);
    const ModificationReport d = modification_series_check(L, EpsSchedule::parse("delta"), 2, 24);
    CHECK(d.verdict == SeriesVerdict::Summable);
    CHECK(d.partials.back() < Dyadic(8));
    CHECK_THROWS_AS(EpsSchedule::parse("exp2:0"), ParseError);
}
