#include "lambdalab/json_io.hpp"

#include <cstdio>
#include <initializer_list>
#include <string>

namespace lambdalab {

namespace {

void only_fields(const json& j, std::initializer_list<const char*> allowed, const char* what)
{
    if (!j.is_object())
        throw ParseError(std::string(what) + ": expected an object");
    for (const auto& [key, _] : j.items()) {
        bool ok = false;
        for (const char* a : allowed)
            ok = ok || key == a;
        if (!ok)
            throw ParseError(std::string(what) + ": unknown field '" + key + "'");
    }
}

const json& field(const json& j, const char* key, const char* what)
{
    if (!j.contains(key))
        throw ParseError(std::string(what) + ": missing field '" + key + "'");
    return j.at(key);
}

template <class T>
T number(const json& j, const char* key, const char* what)
{
    const json& v = field(j, key, what);
    if (!v.is_number_integer())
        throw ParseError(std::string(what) + ": '" + key + "' must be an integer");
    return v.get<T>();
}

std::string hex64(std::uint64_t v)
{
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace

Dyadic dyadic_from_json(const json& j)
{
    if (j.is_number_integer())
        return Dyadic(j.get<std::int64_t>());
    if (j.is_string()) {
        try {
            return Dyadic::parse(j.get<std::string>());
        } catch (const Error& e) {
            throw ParseError(e.what());
        }
    }
    throw ParseError("expected a dyadic string such as \"3/2^2\"");
}

json to_json(const LambdaSet& set)
{
    return std::visit(
        [](const auto& k) -> json {
            using K = std::decay_t<decltype(k)>;
            json j;
            if constexpr (std::is_same_v<K, LambdaSet::Blocks>) {
                j["kind"] = "dyadic_blocks";
                j["blocks"] = json::array();
                for (const auto& b : k.blocks)
                    j["blocks"].push_back({{"m", b.m}, {"n_lo", b.n_lo}, {"n_hi", b.n_hi}});
            } else if constexpr (std::is_same_v<K, LambdaSet::Ladder>) {
                j["kind"] = "dyadic_ladder";
                if (k.k_max)
                    j["k_max"] = *k.k_max;
            } else if constexpr (std::is_same_v<K, LambdaSet::LogIntegers>) {
                j["kind"] = "log_integers";
                j["max_n"] = k.max_n;
            } else if constexpr (std::is_same_v<K, LambdaSet::Explicit>) {
                j["kind"] = "explicit";
                j["points"] = json::array();
                for (const auto& p : k.points)
                    j["points"].push_back(p.to_string());
            } else {
                j["kind"] = "thinned";
                j["base"] = to_json(*k.base);
                j["p"] = k.p.to_string();
                j["seed"] = k.seed;
            }
            return j;
        },
        set.kind());
}

LambdaSet lambda_set_from_json(const json& j)
{
    const char* what = "set descriptor";
    if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
        throw ParseError("set descriptor needs a string 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "dyadic_blocks") {
            only_fields(j, {"kind", "blocks"}, what);
            const json& arr = field(j, "blocks", what);
            if (!arr.is_array())
                throw ParseError("'blocks' must be an array");
            std::vector<DyadicBlock> blocks;
            for (const auto& b : arr) {
                only_fields(b, {"m", "n_lo", "n_hi"}, "dyadic block");
                blocks.push_back({number<int>(b, "m", "dyadic block"), number<std::int64_t>(b, "n_lo", "dyadic block"),
                    number<std::int64_t>(b, "n_hi", "dyadic block")});
            }
            return LambdaSet::dyadic_blocks(std::move(blocks));
        }
        if (kind == "dyadic_ladder") {
            only_fields(j, {"kind", "k_max"}, what);
            if (j.contains("k_max"))
                return LambdaSet::ladder(number<std::int64_t>(j, "k_max", what));
            return LambdaSet::ladder();
        }
        if (kind == "log_integers") {
            only_fields(j, {"kind", "max_n"}, what);
            return LambdaSet::log_integers(number<std::uint64_t>(j, "max_n", what));
        }
        if (kind == "explicit") {
            only_fields(j, {"kind", "points"}, what);
            const json& arr = field(j, "points", what);
            if (!arr.is_array())
                throw ParseError("'points' must be an array");
            std::vector<Dyadic> pts;
            for (const auto& p : arr)
                pts.push_back(dyadic_from_json(p));
            return LambdaSet::explicit_points(std::move(pts));
        }
        if (kind == "thinned") {
            only_fields(j, {"kind", "base", "p", "seed"}, what);
            return thin(lambda_set_from_json(field(j, "base", what)), dyadic_from_json(field(j, "p", what)),
                number<std::uint64_t>(j, "seed", what));
        }
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("set descriptor: ") + e.what());
    } catch (const NestedThinning& e) {
        throw ParseError(std::string("set descriptor: ") + e.what());
    }
    throw ParseError("unknown set kind '" + kind + "'");
}

json to_json(const PiecewiseWitness& f)
{
    json j;
    j["blocks"] = json::array();
    for (const auto& b : f.blocks()) {
        j["blocks"].push_back(
            {{"lo", b.interval.lo().to_string()}, {"hi", b.interval.hi().to_string()}, {"level", b.level.to_string()}});
    }
    if (f.defined_below())
        j["defined_below"] = f.defined_below()->to_string();
    return j;
}

PiecewiseWitness witness_from_json(const json& j)
{
    only_fields(j, {"blocks", "defined_below"}, "witness");
    const json& arr = field(j, "blocks", "witness");
    if (!arr.is_array())
        throw ParseError("witness: 'blocks' must be an array");
    std::vector<WitnessBlock> blocks;
    try {
        for (const auto& b : arr) {
            only_fields(b, {"lo", "hi", "level"}, "witness block");
            blocks.push_back({DyadicInterval(dyadic_from_json(field(b, "lo", "witness block")),
                                  dyadic_from_json(field(b, "hi", "witness block"))),
                dyadic_from_json(field(b, "level", "witness block"))});
        }
        std::optional<Dyadic> below;
        if (j.contains("defined_below"))
            below = dyadic_from_json(j.at("defined_below"));
        return PiecewiseWitness(std::move(blocks), below);
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("witness: ") + e.what());
    }
}

json to_json(const DyadicSet& C)
{
    json arr = json::array();
    for (const auto& J : C.intervals())
        arr.push_back({J.lo().to_string(), J.hi().to_string()});
    return arr;
}

DyadicSet dyadic_set_from_json(const json& j)
{
    if (!j.is_array())
        throw ParseError("dyadic set: expected an array of [lo, hi] pairs");
    std::vector<DyadicInterval> out;
    try {
        for (const auto& p : j) {
            if (!p.is_array() || p.size() != 2)
                throw ParseError("dyadic set: each entry must be [lo, hi]");
            out.emplace_back(dyadic_from_json(p[0]), dyadic_from_json(p[1]));
        }
        return DyadicSet(std::move(out));
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("dyadic set: ") + e.what());
    }
}

json to_json(const RefinedPartition& p)
{
    json j;
    j["K"] = p.K;
    j["window"] = {p.window.lo().to_string(), p.window.hi().to_string()};
    j["provenance_hash"] = hex64(p.provenance_hash);
    j["source"] = to_json(p.source);
    j["pieces"] = json::array();
    for (std::size_t i = 0; i < p.size(); ++i) {
        j["pieces"].push_back({{"n", i + 1}, {"lo", p.intervals[i].lo().to_string()},
            {"hi", p.intervals[i].hi().to_string()}, {"kappa", p.kappas[i]}});
    }
    return j;
}

json to_json(const CTypeConstruction& con)
{
    json j;
    j["set"] = to_json(con.set);
    j["weights"] = con.weights.to_string();
    j["strategy"] = con.strategy == AnchorStrategy::Lambda ? "lambda" : "grid";
    if (con.strategy == AnchorStrategy::Grid)
        j["grid_exponent"] = con.grid_exponent;
    j["blocks"] = json::array();
    for (std::size_t n = 0; n < con.blocks.size(); ++n) {
        const auto& b = con.blocks[n];
        j["blocks"].push_back({{"n", n + 1}, {"y", b.y.to_string()}, {"T", {b.t_first, b.t_last}}, {"log2_d", b.log2_d}});
    }
    return j;
}

} // namespace lambdalab
