#include "lambdalab/witness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lambdalab {

namespace {

// Level at x ignoring the generator horizon.
Dyadic level_at(const std::vector<WitnessBlock>& blocks, const Dyadic& x)
{
    auto it = std::upper_bound(blocks.begin(), blocks.end(), x,
        [](const Dyadic& v, const WitnessBlock& b) { return v < b.interval.lo(); });
    if (it == blocks.begin())
        return Dyadic(0);
    --it;
    return it->interval.contains(x) ? it->level : Dyadic(0);
}

std::optional<Dyadic> min_horizon(const std::optional<Dyadic>& a, const std::optional<Dyadic>& b)
{
    if (!a)
        return b;
    if (!b)
        return a;
    return std::min(*a, *b);
}

std::int64_t ceil_log2(std::uint64_t n)
{
    return n <= 1 ? 0 : bit_length(static_cast<u128>(n - 1));
}

} // namespace

PiecewiseWitness::PiecewiseWitness(std::vector<WitnessBlock> blocks, std::optional<Dyadic> defined_below)
    : blocks_(std::move(blocks)), defined_below_(std::move(defined_below))
{
    for (std::size_t i = 0; i < blocks_.size(); ++i) {
        if (!blocks_[i].level.is_positive())
            throw InvalidArgument("witness levels must be positive");
        if (i > 0 && blocks_[i].interval.lo() < blocks_[i - 1].interval.hi())
            throw InvalidArgument("witness blocks must be sorted and disjoint");
    }
}

PiecewiseWitness PiecewiseWitness::indicator(const DyadicInterval& interval, const Dyadic& level)
{
    return PiecewiseWitness({WitnessBlock{interval, level}});
}

void PiecewiseWitness::require_defined(const Dyadic& x) const
{
    if (defined_below_ && !(x < *defined_below_))
        throw GeneratorExhausted("witness only generated below " + defined_below_->to_string() + ", asked for "
            + x.to_string());
}

Dyadic PiecewiseWitness::eval(const Dyadic& x) const
{
    require_defined(x);
    return level_at(blocks_, x);
}

double PiecewiseWitness::eval_real(double x) const
{
    if (defined_below_ && !(x < defined_below_->to_double()))
        throw GeneratorExhausted("witness only generated below " + defined_below_->to_string());
    for (const auto& b : blocks_) {
        if (x < b.interval.lo().to_double())
            break;
        if (x < b.interval.hi().to_double())
            return b.level.to_double();
    }
    return 0.0;
}

Dyadic PiecewiseWitness::sup_level() const
{
    Dyadic best(0);
    for (const auto& b : blocks_)
        best = std::max(best, b.level);
    return best;
}

bool PiecewiseWitness::is_characteristic() const
{
    return std::all_of(blocks_.begin(), blocks_.end(), [](const WitnessBlock& b) { return b.level == Dyadic(1); });
}

std::optional<DyadicInterval> PiecewiseWitness::hull() const
{
    if (blocks_.empty())
        return std::nullopt;
    return DyadicInterval(blocks_.front().interval.lo(), blocks_.back().interval.hi());
}

PiecewiseWitness PiecewiseWitness::merged() const
{
    std::vector<WitnessBlock> out;
    for (const auto& b : blocks_) {
        if (!out.empty() && out.back().interval.hi() == b.interval.lo() && out.back().level == b.level)
            out.back().interval = DyadicInterval(out.back().interval.lo(), b.interval.hi());
        else
            out.push_back(b);
    }
    return PiecewiseWitness(std::move(out), defined_below_);
}

Dyadic eval_witness(const PiecewiseWitness& f, const Dyadic& x)
{
    return f.eval(x);
}

PiecewiseWitness WitnessGenerator::snapshot(const Dyadic& horizon) const
{
    std::vector<WitnessBlock> blocks;
    for (std::uint64_t i = 0;; ++i) {
        std::optional<WitnessBlock> b = rule_(i);
        if (!b || !(b->interval.lo() < horizon))
            break;
        if (!blocks.empty() && b->interval.lo() < blocks.back().interval.hi())
            throw InvalidArgument("witness generator must yield increasing, disjoint blocks");
        if (horizon < b->interval.hi())
            b->interval = DyadicInterval(b->interval.lo(), horizon);
        blocks.push_back(*b);
    }
    return PiecewiseWitness(std::move(blocks), horizon);
}

PiecewiseWitness combine(const PiecewiseWitness& f, const PiecewiseWitness& g,
    const std::function<Dyadic(const Dyadic&, const Dyadic&)>& op)
{
    std::vector<Dyadic> cuts;
    cuts.reserve(2 * (f.blocks().size() + g.blocks().size()));
    for (const auto* w : {&f, &g}) {
        for (const auto& b : w->blocks()) {
            cuts.push_back(b.interval.lo());
            cuts.push_back(b.interval.hi());
        }
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<WitnessBlock> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const Dyadic r = op(level_at(f.blocks(), cuts[i]), level_at(g.blocks(), cuts[i]));
        if (!r.is_positive())
            continue;
        if (!out.empty() && out.back().interval.hi() == cuts[i] && out.back().level == r)
            out.back().interval = DyadicInterval(out.back().interval.lo(), cuts[i + 1]);
        else
            out.push_back(WitnessBlock{DyadicInterval(cuts[i], cuts[i + 1]), r});
    }
    return PiecewiseWitness(std::move(out), min_horizon(f.defined_below(), g.defined_below()));
}

// ---- partial sums ----------------------------------------------------------

PartialSum partial_sum(const PiecewiseWitness& f, const LambdaSet& set, const WeightSeq& c, const Dyadic& x,
    const Dyadic& lambda_max)
{
    if (!set.is_dyadic())
        throw InvalidArgument("partial_sum needs a dyadic set; use partial_sum_real");
    f.require_defined(x + lambda_max);
    const bool unweighted = c.rule() == WeightSeq::Rule::Ones;
    PartialSum out;
    for (const auto& b : f.blocks()) {
        const Dyadic lo = b.interval.lo() - x;
        if (lambda_max < lo)
            break;
        const Dyadic hi = b.interval.hi() - x;
        const bool cut = lambda_max < hi;
        const Dyadic top = cut ? lambda_max : hi;
        const bool has_top = cut && set.contains(lambda_max);
        if (unweighted) {
            std::uint64_t n = lo < top ? set.count_in(DyadicInterval(lo, top)) : 0;
            n += has_top ? 1 : 0;
            out.terms += n;
            out.value += b.level * Dyadic(static_cast<std::int64_t>(n));
            continue;
        }
        if (lo < top) {
            set.for_each(DyadicInterval(lo, top), [&](const IndexedPoint& p) {
                out.value += c.at(p.rank) * b.level;
                ++out.terms;
            });
        }
        if (has_top) {
            out.value += c.at(set.count_before(lambda_max) + 1) * b.level;
            ++out.terms;
        }
    }
    return out;
}

PartialSumReal partial_sum_real(const PiecewiseWitness& f, const LambdaSet& set, const WeightSeq& c, double x,
    double lambda_max)
{
    PartialSumReal out;
    for (const auto& b : f.blocks()) {
        const double lo = b.interval.lo().to_double() - x;
        const double hi = b.interval.hi().to_double() - x;
        if (lo > lambda_max)
            break;
        // Integer bracket around the window, then filter in binary64.
        const auto lo_i = static_cast<std::int64_t>(std::floor(lo)) - 1;
        const auto hi_i = static_cast<std::int64_t>(std::ceil(std::min(hi, lambda_max))) + 1;
        const DyadicInterval bracket(Dyadic(std::max<std::int64_t>(lo_i, 0)), Dyadic(std::max<std::int64_t>(hi_i, 1)));
        const std::vector<double> pts = set.enumerate_real(bracket);
        const std::uint64_t rank0 = set.count_before(bracket.lo());
        const double level = b.level.to_double();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double lam = pts[i];
            if (lam > lambda_max)
                break;
            const double y = x + lam;
            if (y < b.interval.lo().to_double() || !(y < b.interval.hi().to_double()))
                continue;
            const double w = c.rule() == WeightSeq::Rule::Ones ? 1.0 : c.at(rank0 + i + 1).to_double();
            out.value += w * level;
            ++out.terms;
            out.error_bound += std::ldexp(std::abs(out.value), -52);
        }
    }
    return out;
}

std::string to_string(SumLabel label)
{
    switch (label) {
    case SumLabel::Convergent:
        return "Convergent";
    case SumLabel::Divergent:
        return "Divergent";
    case SumLabel::Undecided:
        return "Undecided";
    }
    return "Undecided";
}

namespace {

template <class T>
SumLabel classify_generic(const std::vector<T>& p, const ClassifyThresholds& t, double (*to_d)(const T&),
    bool (*is_zero)(const T&))
{
    const std::size_t h = p.size();
    if (h == 0)
        return SumLabel::Convergent;
    const std::size_t d = std::max<std::size_t>(1, h / 10);
    auto at = [&](std::size_t i) -> T { return p[i]; };
    const double first = to_d(at(d - 1));
    const double last = to_d(at(h - 1)) - (h - 1 >= d ? to_d(at(h - 1 - d)) : 0.0);
    if (last >= t.divergence_slope * first && to_d(at(h - 1)) > t.divergence_floor)
        return SumLabel::Divergent;
    bool flat = true;
    for (std::size_t i = h / 2; i < h && flat; ++i) {
        const T inc = i == 0 ? p[0] : T(p[i] - p[i - 1]);
        flat = t.convergence_eps == 0.0 ? is_zero(inc) : to_d(inc) <= t.convergence_eps;
    }
    return flat ? SumLabel::Convergent : SumLabel::Undecided;
}

double dbl(const double& v) { return v; }
bool dbl_zero(const double& v) { return v == 0.0; }
double dy(const Dyadic& v) { return v.to_double(); }
bool dy_zero(const Dyadic& v) { return v.is_zero(); }

} // namespace

SumLabel classify_partials(const std::vector<double>& partials, const ClassifyThresholds& t)
{
    // A run that left the binary64 range has certainly passed the floor.
    if (!partials.empty() && std::isinf(partials.back()))
        return SumLabel::Divergent;
    return classify_generic(partials, t, &dbl, &dbl_zero);
}

SumLabel classify_partials(const std::vector<Dyadic>& partials, const ClassifyThresholds& t)
{
    return classify_generic(partials, t, &dy, &dy_zero);
}

SumTrajectory classify_trajectory(const PiecewiseWitness& f, const LambdaSet& set, const WeightSeq& c,
    const Dyadic& x, const std::vector<Dyadic>& horizons, const ClassifyThresholds& thresholds)
{
    for (std::size_t i = 1; i < horizons.size(); ++i) {
        if (!(horizons[i - 1] < horizons[i]))
            throw InvalidArgument("horizons must be increasing");
    }
    SumTrajectory tr;
    tr.x = x;
    tr.horizons = horizons;
    for (const auto& h : horizons)
        tr.partials.push_back(partial_sum(f, set, c, x, h).value);
    tr.label = classify_partials(tr.partials, thresholds);
    return tr;
}

// ---- regularization pipeline ----------------------------------------------

RegularizeResult regularize_f0(const PiecewiseWitness& f, const LambdaSet& set, std::int64_t K,
    std::int64_t window_lo, std::int64_t horizon)
{
    if (K < 0 || window_lo > 0 || horizon < 1)
        throw InvalidArgument("regularize_f0 needs K >= 0, window_lo <= 0, horizon >= 1");
    if (f.defined_below() && *f.defined_below() < Dyadic(horizon))
        throw GeneratorExhausted("witness is not generated up to the pipeline horizon");
    RegularizeResult out;
    std::vector<WitnessBlock> eps_blocks;
    for (std::int64_t k = 1; k <= horizon; ++k) {
        const DyadicInterval I(Dyadic(k == 1 ? window_lo : k - 1), Dyadic(k));
        const std::uint64_t n = set.count_in(DyadicInterval(I.lo() - Dyadic(K), I.hi() + Dyadic(K)));
        const Dyadic eps = Dyadic::pow2(-k - ceil_log2(n));
        out.levels.push_back(EpsLevel{k, I, n, eps});
        eps_blocks.push_back(WitnessBlock{I, eps});
    }
    out.f0 = combine(f, PiecewiseWitness(std::move(eps_blocks)),
        [](const Dyadic& a, const Dyadic& b) { return a + b; });
    return out;
}

PiecewiseWitness clip_f1(const PiecewiseWitness& f0)
{
    std::vector<WitnessBlock> blocks = f0.blocks();
    for (auto& b : blocks)
        b.level = std::min(b.level, Dyadic(1));
    return PiecewiseWitness(std::move(blocks), f0.defined_below()).merged();
}

PiecewiseWitness quantize_f2(const PiecewiseWitness& f1, bool normalize_below_zero, std::int64_t window_lo)
{
    std::vector<WitnessBlock> blocks = f1.blocks();
    for (auto& b : blocks) {
        if (Dyadic(1) < b.level)
            throw InvalidArgument("quantize_f2 needs levels in (0, 1]");
        const std::int64_t e = b.level.floor_log2();
        b.level = Dyadic::pow2(b.level.is_power_of_two() ? e - 1 : e);
    }
    PiecewiseWitness f2 = PiecewiseWitness(std::move(blocks), f1.defined_below()).merged();
    if (normalize_below_zero) {
        if (window_lo >= 0)
            throw InvalidArgument("normalization needs window_lo < 0");
        f2 = combine(f2, PiecewiseWitness::indicator(DyadicInterval(Dyadic(window_lo), Dyadic(0))),
            [](const Dyadic& a, const Dyadic& b) { return b.is_positive() ? b : a; });
    }
    return f2;
}

Dyadic delta_k(const LambdaSet& set, std::int64_t k, std::int64_t K, DeltaRule rule)
{
    k = std::max<std::int64_t>(k, 1);
    std::uint64_t m = 0;
    if (rule == DeltaRule::UnitMax) {
        for (std::int64_t l = 0; l <= k + K; ++l)
            m = std::max(m, set.count_in(DyadicInterval(Dyadic(l), Dyadic(l + 1))));
    } else {
        m = set.count_in(DyadicInterval(Dyadic(k), Dyadic(k + 2)));
    }
    return Dyadic::pow2(-k - ceil_log2(m));
}

namespace {

PiecewiseWitness restrict_to(const PiecewiseWitness& f, const DyadicInterval& w)
{
    std::vector<WitnessBlock> out;
    for (const auto& b : f.blocks()) {
        if (!b.interval.intersects(w))
            continue;
        out.push_back(WitnessBlock{
            DyadicInterval(std::max(b.interval.lo(), w.lo()), std::min(b.interval.hi(), w.hi())), b.level});
    }
    return PiecewiseWitness(std::move(out));
}

PiecewiseWitness snap(const PiecewiseWitness& f, int t)
{
    std::vector<WitnessBlock> out;
    for (const auto& b : f.blocks()) {
        const Dyadic lo = floor_to_grid(b.interval.lo(), t);
        const Dyadic hi = floor_to_grid(b.interval.hi(), t);
        if (lo < hi)
            out.push_back(WitnessBlock{DyadicInterval(lo, hi), b.level});
    }
    return PiecewiseWitness(std::move(out));
}

Dyadic changed_measure(const PiecewiseWitness& a, const PiecewiseWitness& b)
{
    const PiecewiseWitness diff
        = combine(a, b, [](const Dyadic& u, const Dyadic& v) { return Dyadic(u == v ? 0 : 1); });
    Dyadic m(0);
    for (const auto& blk : diff.blocks())
        m += blk.interval.length();
    return m;
}

} // namespace

SimplifyResult simplify_f3(const PiecewiseWitness& f2, const LambdaSet& set, std::int64_t K, DeltaRule rule,
    std::optional<int> snap_exponent)
{
    SimplifyResult out;
    const auto h = f2.hull();
    if (!h) {
        out.f3 = f2;
        return out;
    }
    std::vector<WitnessBlock> blocks;
    for (std::int64_t k = h->lo().floor_int() + 1; k <= h->hi().ceil_int(); ++k) {
        const DyadicInterval unit(Dyadic(k - 1), Dyadic(k));
        const PiecewiseWitness piece = restrict_to(f2, unit);
        UnitBudget budget{k, delta_k(set, k, K, rule), Dyadic(0), -1};
        PiecewiseWitness chosen = piece;
        if (snap_exponent && !piece.empty()) {
            const Dyadic allowed = budget.delta.scaled(1);
            for (int t = 0; t <= *snap_exponent; ++t) {
                PiecewiseWitness cand = snap(piece, t);
                const Dyadic changed = changed_measure(piece, cand);
                if (changed <= allowed) {
                    chosen = std::move(cand);
                    budget.changed = changed;
                    budget.grid_exponent = t;
                    break;
                }
            }
        }
        blocks.insert(blocks.end(), chosen.blocks().begin(), chosen.blocks().end());
        out.units.push_back(budget);
    }
    out.f3 = PiecewiseWitness(std::move(blocks), f2.defined_below()).merged();
    return out;
}

// ---- modification criterion -----------------------------------------------

Dyadic EpsSchedule::at(const LambdaSet& set, std::int64_t x, std::int64_t K) const
{
    if (kind == Kind::Exp2)
        return Dyadic::pow2(-a * x);
    return delta_k(set, std::max<std::int64_t>(x, 1), K, rule).scaled(1);
}

EpsSchedule EpsSchedule::parse(const std::string& text)
{
    EpsSchedule s;
    if (text == "delta") {
        s.kind = Kind::Delta;
    } else if (text == "delta:window2") {
        s.kind = Kind::Delta;
        s.rule = DeltaRule::Window2;
    } else if (text.rfind("exp2:", 0) == 0) {
        s.kind = Kind::Exp2;
        try {
            s.a = std::stoll(text.substr(5));
        } catch (const std::logic_error&) {
            throw ParseError("bad exponent in '" + text + "'");
        }
        if (s.a < 1)
            throw ParseError("exp2 schedule needs a >= 1");
    } else {
        throw ParseError("unknown eps schedule '" + text + "'");
    }
    return s;
}

std::string to_string(SeriesVerdict v)
{
    return v == SeriesVerdict::Summable ? "Summable" : "Unknown";
}

ModificationReport modification_series_check(const LambdaSet& set, const EpsSchedule& eps, std::int64_t K,
    std::int64_t horizon)
{
    if (K < 0 || horizon < 0)
        throw InvalidArgument("modification_series_check needs K >= 0 and horizon >= 0");
    ModificationReport rep;
    Dyadic running(0);
    bool certificate = true;
    for (std::int64_t l = 0; l <= horizon; ++l) {
        const std::uint64_t n = set.count_in(DyadicInterval(Dyadic(l), Dyadic(l + 1)));
        const Dyadic term = eps.at(set, l - K, K) * Dyadic(static_cast<std::int64_t>(n));
        // Geometric certificate for the delta schedule: term_l <= 2^(1 - max(l - K, 1)).
        if (term > Dyadic::pow2(1 - std::max<std::int64_t>(l - K, 1)))
            certificate = false;
        running += term;
        rep.terms.push_back(term);
        rep.partials.push_back(running);
    }
    const std::size_t h = rep.terms.size();
    const std::size_t d = std::max<std::size_t>(1, h / 10);
    double first = 0.0;
    double last = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        first += rep.terms[i].to_double();
        last += rep.terms[h - 1 - i].to_double();
    }
    rep.diverging_trend = last > 0.0 && last >= 0.5 * first;

    const std::optional<int> growth = set.unit_growth_exponent();
    if (set.is_finite()) {
        rep.verdict = SeriesVerdict::Summable;
        rep.reason = "finite set: finitely many nonzero terms";
    } else if (eps.kind == EpsSchedule::Kind::Exp2) {
        if (growth && eps.a > *growth) {
            rep.verdict = SeriesVerdict::Summable;
            rep.reason = "eps decays as 2^-" + std::to_string(eps.a) + "x, unit counts grow at most as 2^"
                + std::to_string(*growth) + "x";
        } else {
            rep.reason = "no decay certificate";
        }
    } else if (eps.rule == DeltaRule::UnitMax) {
        if (certificate) {
            rep.verdict = SeriesVerdict::Summable;
            rep.reason = "each term <= 2^(1 - max(l - K, 1))";
        } else {
            rep.reason = "geometric certificate violated";
        }
    } else {
        rep.reason = "window2 deltas carry no general tail bound";
    }
    return rep;
}

} // namespace lambdalab
