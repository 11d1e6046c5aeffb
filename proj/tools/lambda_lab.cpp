// lambda_lab: experiment runner over the lambdalab library.
//
// Every CSV starts with "# lambda_lab <version> command=<cmd> config=<hash>".
// The hash covers the effective settings except --threads, --config and output paths.

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "lambdalab/ctype.hpp"
#include "lambdalab/density.hpp"
#include "lambdalab/hash.hpp"
#include "lambdalab/json_io.hpp"
#include "lambdalab/parallel.hpp"
#include "lambdalab/random_witness.hpp"
#include "lambdalab/thinning.hpp"

#ifndef LAMBDA_LAB_VERSION
#define LAMBDA_LAB_VERSION "0.0.0"
#endif

using namespace lambdalab;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitCap = 3;
constexpr int kExitRefinement = 4;
constexpr int kExitClaim = 5;

// A verification ran to completion and found a failing exact bound.
struct VerificationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    if (std::isnan(v))
        return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string hex64(std::uint64_t v)
{
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        out.push_back(item);
    return out;
}

std::uint64_t parse_u64(const std::string& s)
{
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ParseError("expected a nonnegative integer, got '" + s + "'");
    return v;
}

// "a,b,c", "grid:lo:hi:e" (closed, step 2^-e) or "step:lo:hi:s" (closed, step s).
std::vector<Dyadic> parse_dyadic_list(const std::string& s)
{
    std::vector<Dyadic> out;
    if (s.empty())
        return out;
    const bool grid = s.rfind("grid:", 0) == 0;
    if (grid || s.rfind("step:", 0) == 0) {
        const auto parts = split(s.substr(5), ':');
        if (parts.size() != 3)
            throw ParseError("expected " + s.substr(0, 4) + ":lo:hi:" + (grid ? "e" : "s") + ", got '" + s + "'");
        const Dyadic lo = Dyadic::parse(parts[0]);
        const Dyadic hi = Dyadic::parse(parts[1]);
        const Dyadic step = grid ? Dyadic::pow2(-static_cast<std::int64_t>(parse_u64(parts[2]))) : Dyadic::parse(parts[2]);
        if (!step.is_positive())
            throw ParseError("grid step must be positive in '" + s + "'");
        for (Dyadic x = lo; x <= hi; x += step)
            out.push_back(x);
        return out;
    }
    for (const auto& item : split(s, ','))
        out.push_back(Dyadic::parse(item));
    return out;
}

// Dyadic list, or "pow2:a:b" for 2^a .. 2^b.
std::vector<Dyadic> parse_horizons(const std::string& s)
{
    if (s.rfind("pow2:", 0) == 0) {
        const auto parts = split(s.substr(5), ':');
        if (parts.size() != 2)
            throw ParseError("expected pow2:a:b, got '" + s + "'");
        std::vector<Dyadic> out;
        for (auto k = static_cast<std::int64_t>(parse_u64(parts[0])); k <= static_cast<std::int64_t>(parse_u64(parts[1]));
             ++k)
            out.push_back(Dyadic::pow2(k));
        return out;
    }
    return parse_dyadic_list(s);
}

// "a..b" (inclusive) or "a,b,c".
std::vector<std::uint64_t> parse_seeds(const std::string& s)
{
    std::vector<std::uint64_t> out;
    if (s.empty())
        return out;
    if (const auto dots = s.find(".."); dots != std::string::npos) {
        const std::uint64_t a = parse_u64(s.substr(0, dots));
        const std::uint64_t b = parse_u64(s.substr(dots + 2));
        for (std::uint64_t v = a; v <= b && b >= a; ++v)
            out.push_back(v);
        return out;
    }
    for (const auto& item : split(s, ','))
        out.push_back(parse_u64(item));
    return out;
}

json read_json_arg(const std::string& text)
{
    try {
        if (!text.empty() && (text.front() == '{' || text.front() == '['))
            return json::parse(text);
        std::ifstream in(text);
        if (!in)
            throw ParseError("cannot open '" + text + "'");
        return json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError("malformed JSON in '" + text + "': " + e.what());
    }
}

// ---- shared option groups ---------------------------------------------------

struct SetOptions {
    std::string kind = "dyadic-ladder";
    std::int64_t k_max = -1; // -1: unbounded
    std::string blocks;      // "m:n_lo:n_hi,..."
    std::uint64_t max_n = 0;
    std::string points;
    std::string set_json;
    std::string thin_p;
    std::uint64_t thin_seed = 0;
};

void add_set_options(CLI::App* sub, SetOptions& o)
{
    sub->add_option("--set", o.kind, "dyadic-ladder | dyadic-blocks | log-integers | explicit | json");
    sub->add_option("--k-max", o.k_max, "last ladder level (-1: unbounded)");
    sub->add_option("--blocks-spec", o.blocks, "dyadic blocks m:n_lo:n_hi,...");
    sub->add_option("--max-n", o.max_n, "log-integers: largest n");
    sub->add_option("--points", o.points, "explicit points a,b,...");
    sub->add_option("--set-json", o.set_json, "set descriptor (file or inline JSON)");
    sub->add_option("--thin-p", o.thin_p, "keep probability for a thinned view");
    sub->add_option("--thin-seed", o.thin_seed, "seed of the thinned view");
}

LambdaSet make_set(const SetOptions& o)
{
    LambdaSet set = LambdaSet::ladder();
    if (o.kind == "dyadic-ladder") {
        set = o.k_max < 0 ? LambdaSet::ladder() : LambdaSet::ladder(o.k_max);
    } else if (o.kind == "dyadic-blocks") {
        std::vector<DyadicBlock> blocks;
        for (const auto& b : split(o.blocks, ',')) {
            const auto f = split(b, ':');
            if (f.size() != 3)
                throw ParseError("dyadic block must be m:n_lo:n_hi, got '" + b + "'");
            blocks.push_back({static_cast<int>(parse_u64(f[0])), static_cast<std::int64_t>(parse_u64(f[1])),
                static_cast<std::int64_t>(parse_u64(f[2]))});
        }
        set = LambdaSet::dyadic_blocks(std::move(blocks));
    } else if (o.kind == "log-integers") {
        set = LambdaSet::log_integers(o.max_n);
    } else if (o.kind == "explicit") {
        set = LambdaSet::explicit_points(parse_dyadic_list(o.points));
    } else if (o.kind == "json") {
        set = lambda_set_from_json(read_json_arg(o.set_json));
    } else {
        throw ParseError("unknown set kind '" + o.kind + "'");
    }
    if (!o.thin_p.empty())
        set = thin(set, Dyadic::parse(o.thin_p), o.thin_seed);
    return set;
}

// ---- output ---------------------------------------------------------------

// Buffers one output; the file (or stdout) is written only when the command
// finishes without throwing, so failures never leave half a report behind.
class Sink {
public:
    explicit Sink(std::string path) : path_(std::move(path)) {}
    Sink(const Sink&) = delete;
    Sink& operator=(const Sink&) = delete;
    ~Sink()
    {
        if (std::uncaught_exceptions() > 0)
            return;
        if (path_.empty() || path_ == "-") {
            std::cout << buf_.str() << std::flush;
            return;
        }
        std::ofstream f(path_, std::ios::binary);
        f << buf_.str();
        if (!f)
            std::cerr << "lambda_lab: cannot write '" << path_ << "'\n";
    }
    std::ostream& os() { return buf_; }

private:
    std::string path_;
    std::ostringstream buf_;
};

struct Context {
    std::string command;
    std::uint64_t config_hash = 0;
    unsigned threads = 1;

    [[nodiscard]] std::string header() const
    {
        return std::string("# lambda_lab ") + LAMBDA_LAB_VERSION + " command=" + command + " config=" + hex64(config_hash)
            + "\n";
    }
};

void write_json(const std::string& path, const json& j)
{
    if (path.empty())
        return;
    Sink s(path);
    s.os() << j.dump(2) << "\n";
}

// ---- set --------------------------------------------------------------------

struct SetCmd {
    SetOptions set;
    std::vector<std::string> window{"0", "8"};
    bool stats = false;
    bool gaps = false;
    std::string out;
};

int run_set(const SetCmd& c, const Context& ctx)
{
    const LambdaSet set = make_set(c.set);
    if (c.window.size() != 2)
        throw ParseError("--window needs lo hi");
    const Dyadic lo = Dyadic::parse(c.window[0]);
    const Dyadic hi = Dyadic::parse(c.window[1]);
    Sink sink(c.out);
    auto& os = sink.os();
    os << ctx.header();
    if (c.stats) {
        os << "a,count\n";
        for (std::int64_t a = lo.ceil_int(); Dyadic(a + 1) <= hi; ++a)
            os << a << "," << set.count_in(Dyadic(a), Dyadic(1)) << "\n";
        return 0;
    }
    if (c.gaps) {
        const GapStats g = lacunarity_scan(set, lo, hi);
        os << "empty_unit_window\n";
        for (const auto w : g.empty_unit_windows)
            os << w << "\n";
        if (g.max_gap_after)
            os << "# max_gap=" << g.max_gap_after->to_string() << "\n";
        else if (g.max_gap_after_real)
            os << "# max_gap=" << fmt(*g.max_gap_after_real) << "\n";
        return 0;
    }
    os << "rank,point,approx\n";
    if (!(lo < hi))
        return 0;
    const DyadicInterval w(lo, hi);
    if (set.is_dyadic()) {
        for (const auto& p : set.enumerate_indexed(w))
            os << p.rank << "," << p.point.to_string() << "," << fmt(p.point.to_double()) << "\n";
    } else {
        std::uint64_t rank = set.count_before(lo);
        for (const double v : set.enumerate_real(w))
            os << ++rank << ",," << fmt(v) << "\n";
    }
    return 0;
}

// ---- thin -------------------------------------------------------------------

struct ThinCmd {
    SetOptions set;
    std::string p = "1/2";
    std::uint64_t seed = 1;
    std::vector<std::string> window{"0", "16"};
    int density_L = -1;
    std::string x_grid;
    std::string density_out;
    std::string out;
};

int run_thin(const ThinCmd& c, const Context& ctx)
{
    const LambdaSet base = make_set(c.set);
    const Dyadic p = Dyadic::parse(c.p);
    const LambdaSet kept = thin(base, p, c.seed);
    if (c.window.size() != 2)
        throw ParseError("--window needs lo hi");
    const Dyadic lo = Dyadic::parse(c.window[0]);
    const Dyadic hi = Dyadic::parse(c.window[1]);
    Sink sink(c.out);
    auto& os = sink.os();
    os << ctx.header() << "a,base_count,kept_count,empty\n";
    for (std::int64_t a = lo.ceil_int(); Dyadic(a + 1) <= hi; ++a) {
        const std::uint64_t k = kept.count_in(Dyadic(a), Dyadic(1));
        os << a << "," << base.count_in(Dyadic(a), Dyadic(1)) << "," << k << "," << (k == 0 ? 1 : 0) << "\n";
    }
    if (c.density_L >= 0) {
        Sink dsink(c.density_out);
        auto& ds = dsink.os();
        ds << ctx.header() << "x,lhs,rhs,holds\n";
        for (const auto& r : density_bound_check(kept, p, c.density_L, parse_dyadic_list(c.x_grid)))
            ds << r.x.to_string() << "," << r.lhs << "," << r.rhs.to_string() << "," << (r.holds ? 1 : 0) << "\n";
    }
    return 0;
}

// ---- ak ---------------------------------------------------------------------

struct AkCmd {
    std::string m = "k";
    std::string n = "unit";
    std::string q = "1/2";
    std::int64_t k_max = 12;
    std::uint64_t trials = 0;
    std::uint64_t seed_base = 1;
    std::uint64_t mc_limit = std::uint64_t{1} << 20; // points per trial
    std::string out;
};

int run_ak(const AkCmd& c, const Context& ctx)
{
    const ExponentRule ms = ExponentRule::parse(c.m);
    const LengthRule lens = LengthRule::parse(c.n);
    const Dyadic q = Dyadic::parse(c.q);
    if (c.k_max < 1)
        throw InvalidArgument("--k-max must be >= 1");
    const AkSeries series = ak_series_partial(ms, lens, q, c.k_max);
    Sink sink(c.out);
    auto& os = sink.os();
    os << ctx.header() << "k,m_k,len,exact,approx,partial,trials,empirical,sigma,within_4sigma\n";
    constexpr std::size_t kChunks = 64; // fixed, so sums never depend on --threads
    for (std::int64_t k = 1; k <= c.k_max; ++k) {
        const std::int64_t m = ms.at(k);
        const LengthRule::Length len = lens.at(k);
        const AkProbability& term = series.terms[static_cast<std::size_t>(k - 1)];
        os << k << "," << m << "," << (len.exact ? std::to_string(*len.exact) : "2^" + fmt(len.log2)) << ","
           << (term.exact ? term.exact->to_string() : "overflow") << "," << fmt(term.approx) << ","
           << fmt(series.partial[static_cast<std::size_t>(k - 1)]) << ",";
        const bool feasible = c.trials > 0 && len.exact && m >= 0 && m <= 40
            && *len.exact <= (c.mc_limit >> std::min<std::int64_t>(m, 63));
        if (!feasible) {
            os << "0,,,\n";
            continue;
        }
        std::vector<std::uint64_t> hits(kChunks, 0);
        parallel_for(kChunks, ctx.threads, [&](std::size_t chunk) {
            for (std::uint64_t i = chunk; i < c.trials; i += kChunks)
                hits[chunk] += ak_trial(static_cast<int>(m), q, *len.exact, c.seed_base + i) ? 1 : 0;
        });
        std::uint64_t total = 0;
        for (const auto h : hits)
            total += h;
        const double n = static_cast<double>(c.trials);
        const double emp = static_cast<double>(total) / n;
        const double sigma = std::sqrt(term.approx * (1.0 - term.approx) / n);
        const bool ok = std::abs(emp - term.approx) <= 4.0 * sigma;
        os << c.trials << "," << fmt(emp) << "," << fmt(sigma) << "," << (ok ? 1 : 0) << "\n";
    }
    os << "# diverging_trend=" << (series.diverging ? 1 : 0) << "\n";
    return 0;
}

// ---- ctype ------------------------------------------------------------------

struct CTypeCmd {
    SetOptions set;
    std::string weights = "superexp";
    std::size_t blocks = 20;
    bool verify = false;
    bool check_only = false;
    std::string strategy = "lambda";
    int grid_exponent = 4;
    std::string div_grid = "grid:0:1/2:4";
    std::string conv_grid = "step:-4:-1:3/8";
    std::string construction_out;
    std::string out;
};

int run_ctype(const CTypeCmd& c, const Context& ctx)
{
    const WeightSeq weights = WeightSeq::parse(c.weights);
    if (c.blocks < 1)
        throw InvalidArgument("--blocks must be >= 1");
    Sink sink(c.out);
    auto& os = sink.os();
    os << ctx.header();
    const FastDecrReport decay = check_fast_decr(weights, c.blocks);
    const std::string verdict = decay.holds() ? "holds" : "fails at n=" + std::to_string(*decay.first_failure);
    if (c.check_only) {
        os << "n,tail,rhs,holds\n";
        for (const auto& r : decay.rows) {
            const std::string tail = r.tail ? fmt(r.tail->num.to_double() / r.tail->den.to_double()) : "inf";
            os << r.n << "," << tail << "," << r.rhs.to_string() << "," << (r.holds ? 1 : 0) << "\n";
        }
        os << "# fast_decay=" << verdict << "\n";
        if (!decay.holds())
            throw VerificationFailed("fast decay " + verdict);
        return 0;
    }
    AnchorStrategy strategy = AnchorStrategy::Lambda;
    if (c.strategy == "grid")
        strategy = AnchorStrategy::Grid;
    else if (c.strategy != "lambda")
        throw ParseError("unknown strategy '" + c.strategy + "'");
    const LambdaSet set = make_set(c.set);
    const CTypeConstruction con = build_construction(set, weights, c.blocks, strategy, c.grid_exponent);
    write_json(c.construction_out, to_json(con));
    os << "# fast_decay=" << verdict << "\n";
    if (!c.verify) {
        os << "n,y,t_first,t_last,log2_d\n";
        for (std::size_t n = 0; n < con.blocks.size(); ++n) {
            const auto& b = con.blocks[n];
            os << n + 1 << "," << b.y.to_string() << "," << b.t_first << "," << b.t_last << "," << fmt(b.log2_d) << "\n";
        }
        return 0;
    }
    const ClaimReport div = verify_claim_divergence(con, parse_dyadic_list(c.div_grid), c.blocks, ctx.threads);
    const ClaimReport conv = verify_claim_convergence(con, parse_dyadic_list(c.conv_grid), c.blocks, ctx.threads);
    os << "side,x,n,block_contribution,log2_contribution,partial,bound,ok\n";
    for (const auto* rep : {&div, &conv}) {
        const char* side = rep == &div ? "D" : "C";
        for (const auto& r : rep->rows) {
            os << side << "," << r.x.to_string() << "," << r.n << "," << fmt(r.block_contribution) << ","
               << fmt(r.log2_contribution) << "," << fmt(r.partial) << "," << r.bound << "," << (r.ok ? 1 : 0) << "\n";
        }
    }
    os << "# divergence_claim=" << (div.all_ok ? "holds" : div.first_violation) << "\n";
    os << "# convergence_claim=" << (conv.all_ok ? "holds" : conv.first_violation) << "\n";
    if (!div.all_ok || !conv.all_ok)
        throw VerificationFailed(div.all_ok ? conv.first_violation : div.first_violation);
    return 0;
}

// ---- randomize --------------------------------------------------------------

struct RandomizeCmd {
    SetOptions set;
    bool demo = false;
    int demo_j = 16;
    std::string witness;
    std::int64_t K = 1;
    std::string seeds;
    std::string c_grid;
    std::string d_grid;
    std::string horizons;
    std::string partition_out;
    std::string summary_out;
    std::string pieces_out;
    std::string out;
};

bool already_simplified(const PiecewiseWitness& f)
{
    for (const auto& b : f.blocks()) {
        if (!b.level.is_power_of_two() || Dyadic(1) < b.level)
            return false;
    }
    return true;
}

int run_randomize(const RandomizeCmd& c, const Context& ctx)
{
    LambdaSet set = LambdaSet::ladder();
    PiecewiseWitness f;
    std::vector<Dyadic> c_grid, d_grid, horizons;
    std::int64_t K = c.K;
    if (c.demo) {
        const LacunaryDemo demo = make_lacunary_demo(c.demo_j, c.K);
        set = demo.set;
        f = demo.witness;
        c_grid = demo.c_grid;
        d_grid = demo.d_grid;
        horizons = demo.horizons;
    } else {
        if (c.witness.empty())
            throw ParseError("randomize needs --demo or --witness");
        set = make_set(c.set);
        f = witness_from_json(read_json_arg(c.witness));
    }
    if (!c.c_grid.empty())
        c_grid = parse_dyadic_list(c.c_grid);
    if (!c.d_grid.empty())
        d_grid = parse_dyadic_list(c.d_grid);
    if (!c.horizons.empty())
        horizons = parse_horizons(c.horizons);

    std::string provenance = "as given";
    if (!already_simplified(f)) {
        const auto hull = f.hull();
        const std::int64_t horizon = hull ? std::max<std::int64_t>(1, hull->hi().ceil_int()) : 1;
        const PiecewiseWitness f2 = quantize_f2(clip_f1(regularize_f0(f, set, K, -K, horizon).f0));
        f = simplify_f3(f2, set, K, DeltaRule::UnitMax).f3;
        provenance = "regularized, clipped, quantized, simplified (K=" + std::to_string(K) + ")";
    }
    const DyadicInterval window(Dyadic(-K), Dyadic(K + 1));
    const RefinedPartition p = refine_partition(f, set, K, window);
    json pj = to_json(p);
    pj["pipeline"] = provenance;
    write_json(c.partition_out, pj);

    const std::vector<std::uint64_t> seeds = parse_seeds(c.seeds);
    const EnsembleReport rep = ensemble_report(p, set, seeds, c_grid, d_grid, horizons, ctx.threads);
    Sink sink(c.out);
    auto& os = sink.os();
    os << ctx.header() << "seed,side,x,horizon,hits,expected,expected_approx\n";
    for (const auto& r : rep.rows) {
        os << r.seed << "," << r.side << "," << r.x.to_string() << "," << r.horizon.to_string() << "," << r.hits << ","
           << r.expected.to_string() << "," << fmt(r.expected.to_double()) << "\n";
    }
    if (!c.summary_out.empty()) {
        Sink s(c.summary_out);
        s.os() << ctx.header() << "side,x,expected,mean_hits,stabilized\n";
        for (const auto& pt : rep.points) {
            s.os() << pt.side << "," << pt.x.to_string() << "," << pt.expected.to_string() << "," << fmt(pt.mean_hits)
                   << "," << fmt(pt.stabilized) << "\n";
        }
    }
    if (!c.pieces_out.empty()) {
        Sink s(c.pieces_out);
        s.os() << ctx.header() << "n,lo,hi,kappa,ones,frequency\n";
        for (const auto& pc : rep.pieces) {
            const auto& J = p.intervals[pc.n - 1];
            s.os() << pc.n << "," << J.lo().to_string() << "," << J.hi().to_string() << "," << pc.kappa << ","
                   << pc.ones << "," << fmt(pc.frequency) << "\n";
        }
    }
    return 0;
}

// ---- density ----------------------------------------------------------------

struct DensityCmd {
    std::string intervals; // "lo:hi,lo:hi"
    std::string set_json;
    std::string x = "0";
    std::int64_t n_from = -1;
    std::int64_t n_to = -12;
    std::string out;
};

int run_density(const DensityCmd& c, const Context& ctx)
{
    DyadicSet C;
    if (!c.set_json.empty()) {
        C = dyadic_set_from_json(read_json_arg(c.set_json));
    } else {
        std::vector<DyadicInterval> ivs;
        for (const auto& item : split(c.intervals, ',')) {
            const auto f = split(item, ':');
            if (f.size() != 2)
                throw ParseError("interval must be lo:hi, got '" + item + "'");
            ivs.emplace_back(Dyadic::parse(f[0]), Dyadic::parse(f[1]));
        }
        C = DyadicSet(std::move(ivs));
    }
    if (c.n_from > 0 || c.n_to > c.n_from)
        throw InvalidArgument("need 0 >= --n-from >= --n-to");
    std::vector<std::int64_t> ns;
    for (std::int64_t n = c.n_from; n >= c.n_to; --n)
        ns.push_back(n);
    const DensityProfile prof = density_profile(C, Dyadic::parse(c.x), ns);
    Sink sink(c.out);
    auto& os = sink.os();
    os << ctx.header() << "n,count,scaled,exact,guaranteed\n";
    for (const auto& r : prof.rows) {
        os << r.n << "," << r.count << "," << r.scaled.to_string() << "," << (r.exact ? 1 : 0) << ","
           << (r.guaranteed ? 1 : 0) << "\n";
    }
    os << "# measure=" << prof.measure.to_string();
    if (prof.first_exact)
        os << " first_exact=" << *prof.first_exact;
    os << "\n";
    return 0;
}

// ---- sum --------------------------------------------------------------------

struct SumCmd {
    SetOptions set;
    std::string witness;
    std::vector<std::string> indicator;
    std::string weights = "ones";
    std::string x = "0";
    std::string horizons = "pow2:0:8";
    std::string out;
};

int run_sum(const SumCmd& c, const Context& ctx)
{
    const LambdaSet set = make_set(c.set);
    PiecewiseWitness f;
    if (!c.witness.empty())
        f = witness_from_json(read_json_arg(c.witness));
    else if (c.indicator.size() == 2)
        f = PiecewiseWitness::indicator(DyadicInterval(Dyadic::parse(c.indicator[0]), Dyadic::parse(c.indicator[1])));
    else
        throw ParseError("sum needs --witness or --indicator lo hi");
    const WeightSeq weights = WeightSeq::parse(c.weights);
    const std::vector<Dyadic> xs = parse_dyadic_list(c.x);
    const std::vector<Dyadic> hs = parse_horizons(c.horizons);
    std::vector<SumTrajectory> trs(xs.size());
    parallel_for(xs.size(), ctx.threads, [&](std::size_t i) { trs[i] = classify_trajectory(f, set, weights, xs[i], hs); });
    Sink sink(c.out);
    auto& os = sink.os();
    os << ctx.header() << "x,horizon,partial,partial_approx,label\n";
    for (const auto& tr : trs) {
        for (std::size_t h = 0; h < tr.horizons.size(); ++h) {
            os << tr.x.to_string() << "," << tr.horizons[h].to_string() << "," << tr.partials[h].to_string() << ","
               << fmt(tr.partials[h].to_double()) << "," << to_string(tr.label) << "\n";
        }
    }
    return 0;
}

// ---- series -----------------------------------------------------------------

struct SeriesCmd {
    SetOptions set;
    std::string eps = "exp2:2";
    std::int64_t K = 1;
    std::int64_t horizon = 32;
    std::string out;
};

int run_series(const SeriesCmd& c, const Context& ctx)
{
    const LambdaSet set = make_set(c.set);
    const ModificationReport rep = modification_series_check(set, EpsSchedule::parse(c.eps), c.K, c.horizon);
    Sink sink(c.out);
    auto& os = sink.os();
    os << ctx.header() << "l,term,partial\n";
    for (std::size_t l = 0; l < rep.terms.size(); ++l)
        os << l << "," << rep.terms[l].to_string() << "," << rep.partials[l].to_string() << "\n";
    os << "# verdict=" << to_string(rep.verdict) << " diverging_trend=" << (rep.diverging_trend ? 1 : 0)
       << " reason=" << rep.reason << "\n";
    return 0;
}

// ---- config plumbing --------------------------------------------------------

bool excluded_from_hash(const std::string& name)
{
    return name == "--threads" || name == "--config" || name == "--help" || name == "--out"
        || (name.size() > 4 && name.compare(name.size() - 4, 4, "-out") == 0);
}

std::string option_key(const CLI::Option* opt)
{
    return opt->get_name(false, true);
}

// Keys of the config object name long options of the chosen command (or
// "threads"); flags given on the command line win.
void apply_config(CLI::App& app, CLI::App* sub, const json& cfg)
{
    if (!cfg.is_object())
        throw ParseError("config must be a JSON object");
    for (const auto& [key, value] : cfg.items()) {
        if (key == "command") {
            if (!value.is_string() || value.get<std::string>() != sub->get_name())
                throw ParseError("config is for command " + value.dump() + ", not '" + sub->get_name() + "'");
            continue;
        }
        CLI::Option* opt = key == "threads" ? app.get_option_no_throw("--threads") : sub->get_option_no_throw("--" + key);
        if (opt == nullptr || key == "help")
            throw ParseError("unknown config field '" + key + "'");
        if (opt->count() > 0)
            continue;
        auto as_text = [&](const json& v) -> std::string {
            if (v.is_string())
                return v.get<std::string>();
            if (v.is_boolean())
                return v.get<bool>() ? "true" : "false";
            if (v.is_number_integer() || v.is_number_unsigned())
                return v.dump();
            throw ParseError("config field '" + key + "' must be a string, integer or boolean");
        };
        if (value.is_array()) {
            for (const auto& v : value)
                opt->add_result(as_text(v));
        } else {
            opt->add_result(as_text(value));
        }
        opt->run_callback();
    }
}

std::uint64_t config_hash(const CLI::App* sub)
{
    std::string canon = "command=" + sub->get_name() + ";";
    for (const CLI::Option* opt : sub->get_options()) {
        const std::string name = option_key(opt);
        if (name.empty() || excluded_from_hash(name))
            continue;
        canon += name + "=";
        if (opt->count() > 0) {
            for (const auto& r : opt->results())
                canon += r + " ";
        } else {
            canon += opt->get_default_str();
        }
        canon += ";";
    }
    return fnv1a(canon);
}

int exit_for(const std::exception& e, int code)
{
    std::cerr << "lambda_lab: " << e.what() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app("Translated-sum experiments over discrete sets", "lambda_lab");
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", LAMBDA_LAB_VERSION);
    unsigned threads = 1;
    std::string config_path;
    app.add_option("--threads", threads, "worker threads (output never depends on it)")->check(CLI::Range(1U, 256U));
    app.add_option("--config", config_path, "JSON config; command-line flags override it");

    SetCmd set_cmd;
    auto* set_sub = app.add_subcommand("set", "enumerate, count or scan a set");
    add_set_options(set_sub, set_cmd.set);
    set_sub->add_option("--window", set_cmd.window, "lo hi")->expected(2);
    set_sub->add_flag("--stats", set_cmd.stats, "points per unit window");
    set_sub->add_flag("--gaps", set_cmd.gaps, "empty unit windows and the largest gap");
    set_sub->add_option("--out", set_cmd.out, "CSV path (default stdout)");

    ThinCmd thin_cmd;
    auto* thin_sub = app.add_subcommand("thin", "thin a set and scan its unit windows");
    add_set_options(thin_sub, thin_cmd.set);
    thin_sub->add_option("--p", thin_cmd.p, "keep probability");
    thin_sub->add_option("--seed", thin_cmd.seed, "thinning seed");
    thin_sub->add_option("--window", thin_cmd.window, "lo hi")->expected(2);
    thin_sub->add_option("--density-L", thin_cmd.density_L, "check the p-dense bound at this L");
    thin_sub->add_option("--x-grid", thin_cmd.x_grid, "grid for the p-dense bound");
    thin_sub->add_option("--density-out", thin_cmd.density_out, "CSV path for the p-dense rows");
    thin_sub->add_option("--out", thin_cmd.out, "CSV path (default stdout)");

    AkCmd ak_cmd;
    auto* ak_sub = app.add_subcommand("ak", "deletion-event probabilities: formula against Monte Carlo");
    ak_sub->add_option("--m", ak_cmd.m, "exponent rule: k | const:c | linear:a,b | list:...");
    ak_sub->add_option("--n", ak_cmd.n, "block lengths: unit | const:c | ln2-superexp | list:...");
    ak_sub->add_option("--q", ak_cmd.q, "deletion probability");
    ak_sub->add_option("--k-max", ak_cmd.k_max, "last block");
    ak_sub->add_option("--trials", ak_cmd.trials, "Monte Carlo trials per block");
    ak_sub->add_option("--seed-base", ak_cmd.seed_base, "trial i uses seed base + i");
    ak_sub->add_option("--mc-limit", ak_cmd.mc_limit, "skip Monte Carlo above this many points per trial");
    ak_sub->add_option("--out", ak_cmd.out, "CSV path (default stdout)");

    CTypeCmd ct_cmd;
    auto* ct_sub = app.add_subcommand("ctype", "weighted construction and exact claim checks");
    add_set_options(ct_sub, ct_cmd.set);
    ct_sub->add_option("--weights", ct_cmd.weights, "ones | superexp | geometric:r | table:a,b,...");
    ct_sub->add_option("--blocks", ct_cmd.blocks, "number of blocks N");
    ct_sub->add_flag("--verify", ct_cmd.verify, "verify both claims exactly (exit 5 on failure)");
    ct_sub->add_flag("--check-only", ct_cmd.check_only, "only test the fast-decay condition");
    ct_sub->add_option("--strategy", ct_cmd.strategy, "lambda | grid");
    ct_sub->add_option("--grid-exponent", ct_cmd.grid_exponent, "grid strategy resolution");
    ct_sub->add_option("--div-grid", ct_cmd.div_grid, "x grid in [0, 1/2]");
    ct_sub->add_option("--conv-grid", ct_cmd.conv_grid, "x grid below -1/2");
    ct_sub->add_option("--construction-out", ct_cmd.construction_out, "JSON path for the construction");
    ct_sub->add_option("--out", ct_cmd.out, "CSV path (default stdout)");

    RandomizeCmd rz_cmd;
    auto* rz_sub = app.add_subcommand("randomize", "random characteristic witness ensemble");
    add_set_options(rz_sub, rz_cmd.set);
    rz_sub->add_flag("--demo", rz_cmd.demo, "lacunary powers-of-two demo");
    rz_sub->add_option("--demo-j", rz_cmd.demo_j, "demo: largest exponent J");
    rz_sub->add_option("--witness", rz_cmd.witness, "witness JSON (file or inline)");
    rz_sub->add_option("--K", rz_cmd.K, "window half-width");
    rz_sub->add_option("--seeds", rz_cmd.seeds, "a..b or a,b,c (empty: partition only)");
    rz_sub->add_option("--c-grid", rz_cmd.c_grid, "convergence-side grid");
    rz_sub->add_option("--d-grid", rz_cmd.d_grid, "divergence-side grid");
    rz_sub->add_option("--horizons", rz_cmd.horizons, "list or pow2:a:b");
    rz_sub->add_option("--partition-out", rz_cmd.partition_out, "JSON path for the refined partition");
    rz_sub->add_option("--summary-out", rz_cmd.summary_out, "CSV path for per-point summaries");
    rz_sub->add_option("--pieces-out", rz_cmd.pieces_out, "CSV path for per-piece frequencies");
    rz_sub->add_option("--out", rz_cmd.out, "CSV path (default stdout)");

    DensityCmd dn_cmd;
    auto* dn_sub = app.add_subcommand("density", "translate counts of a dyadic union");
    dn_sub->add_option("--intervals", dn_cmd.intervals, "lo:hi,lo:hi inside [0, 1)");
    dn_sub->add_option("--set-json", dn_cmd.set_json, "[[lo, hi], ...] (file or inline)");
    dn_sub->add_option("--x", dn_cmd.x, "offset in [0, 1)");
    dn_sub->add_option("--n-from", dn_cmd.n_from, "first n (<= 0)");
    dn_sub->add_option("--n-to", dn_cmd.n_to, "last n");
    dn_sub->add_option("--out", dn_cmd.out, "CSV path (default stdout)");

    SumCmd sum_cmd;
    auto* sum_sub = app.add_subcommand("sum", "exact partial sums and advisory labels");
    add_set_options(sum_sub, sum_cmd.set);
    sum_sub->add_option("--witness", sum_cmd.witness, "witness JSON (file or inline)");
    sum_sub->add_option("--indicator", sum_cmd.indicator, "lo hi")->expected(2);
    sum_sub->add_option("--weights", sum_cmd.weights, "weight rule");
    sum_sub->add_option("--x", sum_cmd.x, "translate grid");
    sum_sub->add_option("--horizons", sum_cmd.horizons, "list or pow2:a:b");
    sum_sub->add_option("--out", sum_cmd.out, "CSV path (default stdout)");

    SeriesCmd se_cmd;
    auto* se_sub = app.add_subcommand("series", "summability of the modification series");
    add_set_options(se_sub, se_cmd.set);
    se_sub->add_option("--eps", se_cmd.eps, "exp2:a | delta | delta:window2");
    se_sub->add_option("--K", se_cmd.K, "window half-width");
    se_sub->add_option("--horizon", se_cmd.horizon, "last l");
    se_sub->add_option("--out", se_cmd.out, "CSV path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0)
            return app.exit(e);
        std::cerr << "lambda_lab: " << e.what() << "\n";
        return kExitConfig;
    }

    CLI::App* sub = app.get_subcommands().front();
    Context ctx;
    ctx.command = sub->get_name();
    ctx.threads = threads;
    try {
        if (const char* cap = std::getenv("LAMBDA_LAB_CAP"))
            set_enumeration_cap(parse_u64(cap));
        if (!config_path.empty())
            apply_config(app, sub, read_json_arg(config_path));
        ctx.config_hash = config_hash(sub);
        ctx.threads = threads;
        if (sub == set_sub)
            return run_set(set_cmd, ctx);
        if (sub == thin_sub)
            return run_thin(thin_cmd, ctx);
        if (sub == ak_sub)
            return run_ak(ak_cmd, ctx);
        if (sub == ct_sub)
            return run_ctype(ct_cmd, ctx);
        if (sub == rz_sub)
            return run_randomize(rz_cmd, ctx);
        if (sub == dn_sub)
            return run_density(dn_cmd, ctx);
        if (sub == sum_sub)
            return run_sum(sum_cmd, ctx);
        return run_series(se_cmd, ctx);
    } catch (const VerificationFailed& e) {
        return exit_for(e, kExitClaim);
    } catch (const WindowTooLarge& e) {
        return exit_for(e, kExitCap);
    } catch (const RefinementFailed& e) {
        return exit_for(e, kExitRefinement);
    } catch (const CLI::Error& e) {
        return exit_for(e, kExitConfig);
    } catch (const OverflowError& e) {
        return exit_for(e, 1);
    } catch (const Error& e) {
        return exit_for(e, kExitConfig);
    } catch (const std::exception& e) {
        return exit_for(e, 1);
    }
}
