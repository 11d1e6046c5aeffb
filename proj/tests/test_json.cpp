#include <doctest.h>

#include "lambdalab/json_io.hpp"

using namespace lambdalab;

TEST_CASE("set descriptors round-trip")
{
    const std::vector<LambdaSet> sets = {
        LambdaSet::ladder(),
        LambdaSet::ladder(7),
        LambdaSet::dyadic_blocks({{1, 1, 3}, {2, 3, 4}}),
        LambdaSet::log_integers(1000),
        LambdaSet::explicit_points({Dyadic(0), Dyadic(3, 2), Dyadic(5)}),
        thin(LambdaSet::ladder(8), Dyadic(1, 1), 42),
    };
    for (const auto& s : sets) {
        const json j = to_json(s);
        const LambdaSet back = lambda_set_from_json(json::parse(j.dump()));
        CHECK(to_json(back) == j);
        if (s.is_dyadic()) {
            const DyadicInterval w(Dyadic(0), Dyadic(6));
            CHECK(back.enumerate(w) == s.enumerate(w));
        }
    }
    CHECK(to_json(sets[5]).dump() == R"({"kind":"thinned","base":{"kind":"dyadic_ladder","k_max":8},"p":"1/2^1","seed":42})");
}

TEST_CASE("set descriptors reject bad input")
{
    CHECK_THROWS_AS(lambda_set_from_json(json::parse(R"({"kind":"dyadic_ladder","kmax":3})")), ParseError);
    CHECK_THROWS_AS(lambda_set_from_json(json::parse(R"({"kind":"spiral"})")), ParseError);
    CHECK_THROWS_AS(lambda_set_from_json(json::parse(R"({"kind":"log_integers","max_n":"ten"})")), ParseError);
    CHECK_THROWS_AS(lambda_set_from_json(json::parse(R"([1, 2])")), ParseError);
    CHECK_THROWS_AS(lambda_set_from_json(json::parse(R"({"kind":"explicit","points":["1/2^1","x"]})")), ParseError);
    CHECK_THROWS(lambda_set_from_json(json::parse(
        R"({"kind":"thinned","base":{"kind":"thinned","base":{"kind":"dyadic_ladder"},"p":"1/2^1","seed":1},"p":"1/2^1","seed":2})")));
}

TEST_CASE("witnesses and dyadic sets round-trip")
{
    const PiecewiseWitness f({{DyadicInterval(Dyadic(0), Dyadic(1, 1)), Dyadic(3, 2)},
                                 {DyadicInterval(Dyadic(2), Dyadic(9, 2)), Dyadic(1)}},
        Dyadic(4));
    CHECK(witness_from_json(json::parse(to_json(f).dump())) == f);
    CHECK_THROWS_AS(witness_from_json(json::parse(R"({"blocks":[{"lo":"0","hi":"1","lvl":"1"}]})")), ParseError);
    CHECK_THROWS_AS(witness_from_json(json::parse(R"({"blocks":[{"lo":"1","hi":"0","level":"1"}]})")), ParseError);

    const DyadicSet C({DyadicInterval(Dyadic(0), Dyadic(1, 2)), DyadicInterval(Dyadic(1, 1), Dyadic(3, 2))});
    const DyadicSet back = dyadic_set_from_json(json::parse(to_json(C).dump()));
    CHECK(back.intervals() == C.intervals());
    CHECK_THROWS_AS(dyadic_set_from_json(json::parse(R"([["0","2"]])")), ParseError);
}

TEST_CASE("dyadic literals")
{
    CHECK(dyadic_from_json(json("3/2^2")) == Dyadic(3, 2));
    CHECK(dyadic_from_json(json(-5)) == Dyadic(-5));
    CHECK_THROWS_AS(dyadic_from_json(json(0.5)), ParseError);
    CHECK_THROWS_AS(dyadic_from_json(json("1/3")), ParseError);
}
