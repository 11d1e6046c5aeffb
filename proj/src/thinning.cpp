#include "lambdalab/thinning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "lambdalab/sampler.hpp"

namespace lambdalab {

std::optional<Dyadic> max_gap(const LambdaSet& set, const DyadicInterval& window)
{
    return set.max_gap(window);
}

std::optional<double> max_gap_real(const LambdaSet& set, const DyadicInterval& window)
{
    if (set.is_dyadic()) {
        const auto g = set.max_gap(window);
        return g ? std::optional<double>(g->to_double()) : std::nullopt;
    }
    const std::vector<double> pts = set.enumerate_real(window);
    std::optional<double> best;
    for (std::size_t i = 1; i < pts.size(); ++i)
        best = std::max(best.value_or(0.0), pts[i] - pts[i - 1]);
    return best;
}

GapStats lacunarity_scan(const LambdaSet& set, const Dyadic& a, const Dyadic& horizon)
{
    GapStats stats;
    stats.horizon = horizon;
    const std::int64_t last_window = horizon.floor_int() - 1; // [w, w+1) ⊂ [0, horizon)
    for (std::int64_t w = 0; w <= last_window; ++w) {
        if (set.count_in(DyadicInterval(Dyadic(w), Dyadic(w + 1))) == 0)
            stats.empty_unit_windows.push_back(w);
    }
    if (a < horizon) {
        const DyadicInterval tail(a, horizon);
        if (set.is_dyadic()) {
            stats.max_gap_after = set.max_gap(tail);
            if (stats.max_gap_after)
                stats.max_gap_after_real = stats.max_gap_after->to_double();
        } else {
            stats.max_gap_after_real = max_gap_real(set, tail);
        }
    }
    return stats;
}

std::vector<DensityRow> density_bound_check(const LambdaSet& set, const Dyadic& p, int L,
    const std::vector<Dyadic>& x_grid)
{
    if (L < 0)
        throw InvalidArgument("density_bound_check: L must be >= 0");
    std::vector<DensityRow> rows;
    rows.reserve(x_grid.size());
    const Dyadic width = Dyadic::pow2(-L);
    for (const Dyadic& x : x_grid) {
        if (x.is_negative())
            throw InvalidArgument("density_bound_check: grid points must be >= 0");
        DensityRow row;
        row.x = x;
        row.lhs = set.count_in(x, width);
        row.rhs = p.scaled(x.floor_int() - L - 2);
        row.holds = Dyadic(static_cast<std::int64_t>(row.lhs)) > row.rhs;
        rows.push_back(row);
    }
    return rows;
}

namespace {

void check_q(const Dyadic& q)
{
    if (!(q.is_positive() && q < Dyadic(1)))
        throw InvalidArgument("q must lie in (0, 1)");
}

} // namespace

double ak_probability_approx(int m, const Dyadic& q, double log2_block_len)
{
    check_q(q);
    if (std::isinf(log2_block_len) && log2_block_len < 0)
        return 0.0; // empty block: no unit window exists
    // t = q^(2^m); u = len * (-log1p(-t)); P = 1 - e^-u.
    const double log2_t = std::ldexp(std::log2(q.to_double()), m);
    double u = 0.0;
    if (log2_t > -1000.0) {
        const double t = std::exp2(log2_t);
        u = std::exp2(log2_block_len) * -std::log1p(-t);
    } else {
        // -log1p(-t) = t (1 + O(t)) and t underflows: combine in the log domain.
        u = std::exp2(log2_block_len + log2_t);
    }
    return -std::expm1(-u);
}

AkProbability ak_probability(int m, const Dyadic& q, std::uint64_t block_len)
{
    check_q(q);
    if (m < 0)
        throw InvalidArgument("ak_probability: m must be >= 0");
    AkProbability out;
    if (block_len == 0) {
        out.exact = Dyadic(0);
        out.approx = 0.0;
        return out;
    }
    out.approx = ak_probability_approx(m, q, std::log2(static_cast<double>(block_len)));
    if (m < 63) {
        try {
            const Dyadic t = dyadic_pow(q, std::uint64_t{1} << m);
            const Dyadic keep = dyadic_pow(Dyadic(1) - t, block_len);
            out.exact = Dyadic(1) - keep;
            out.approx = out.exact->to_double();
        } catch (const OverflowError&) {
            out.exact.reset();
        }
    }
    return out;
}

std::int64_t ExponentRule::at(std::int64_t k) const
{
    switch (kind) {
    case Kind::Identity:
        return k;
    case Kind::Constant:
        return a;
    case Kind::Linear:
        return a * k + b;
    case Kind::List:
        if (k < 1 || static_cast<std::size_t>(k) > values.size())
            throw InvalidArgument("exponent rule list exhausted at k = " + std::to_string(k));
        return values[static_cast<std::size_t>(k - 1)];
    }
    return k;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep))
        parts.push_back(item);
    return parts;
}

std::int64_t to_int(const std::string& s)
{
    try {
        std::size_t pos = 0;
        const long long v = std::stoll(s, &pos);
        if (pos != s.size())
            throw ParseError("not an integer: '" + s + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("not an integer: '" + s + "'");
    }
}

} // namespace

ExponentRule ExponentRule::parse(const std::string& text)
{
    ExponentRule r;
    if (text == "k") {
        r.kind = Kind::Identity;
    } else if (text.rfind("const:", 0) == 0) {
        r.kind = Kind::Constant;
        r.a = to_int(text.substr(6));
    } else if (text.rfind("linear:", 0) == 0) {
        const auto parts = split(text.substr(7), ',');
        if (parts.size() != 2)
            throw ParseError("linear rule needs 'linear:a,b'");
        r.kind = Kind::Linear;
        r.a = to_int(parts[0]);
        r.b = to_int(parts[1]);
    } else if (text.rfind("list:", 0) == 0) {
        r.kind = Kind::List;
        for (const auto& p : split(text.substr(5), ','))
            r.values.push_back(to_int(p));
    } else {
        throw ParseError("unknown exponent rule '" + text + "'");
    }
    return r;
}

LengthRule::Length LengthRule::at(std::int64_t k) const
{
    Length len;
    auto from_exact = [&](std::uint64_t v) {
        len.exact = v;
        len.log2 = v == 0 ? -std::numeric_limits<double>::infinity() : std::log2(static_cast<double>(v));
    };
    switch (kind) {
    case Kind::Unit:
        from_exact(1);
        break;
    case Kind::Constant:
        from_exact(c);
        break;
    case Kind::List:
        if (k < 1 || static_cast<std::size_t>(k) > values.size())
            throw InvalidArgument("length rule list exhausted at k = " + std::to_string(k));
        from_exact(values[static_cast<std::size_t>(k - 1)]);
        break;
    case Kind::Ln2SuperExp:
        if (k < 0)
            throw InvalidArgument("ln2-superexp needs k >= 0");
        if (k <= 5) {
            // 2^(2^k) <= 2^32: long double carries enough bits for the ceiling.
            const long double v = std::ceil(std::log(2.0L) * std::ldexp(1.0L, 1 << k));
            from_exact(static_cast<std::uint64_t>(v));
        } else {
            len.log2 = std::ldexp(1.0, static_cast<int>(std::min<std::int64_t>(k, 1000))) + std::log2(std::log(2.0));
        }
        break;
    }
    return len;
}

LengthRule LengthRule::parse(const std::string& text)
{
    LengthRule r;
    if (text == "unit") {
        r.kind = Kind::Unit;
    } else if (text == "ln2-superexp") {
        r.kind = Kind::Ln2SuperExp;
    } else if (text.rfind("const:", 0) == 0) {
        r.kind = Kind::Constant;
        const std::int64_t v = to_int(text.substr(6));
        if (v < 0)
            throw ParseError("block length must be >= 0");
        r.c = static_cast<std::uint64_t>(v);
    } else if (text.rfind("list:", 0) == 0) {
        r.kind = Kind::List;
        for (const auto& p : split(text.substr(5), ',')) {
            const std::int64_t v = to_int(p);
            if (v < 0)
                throw ParseError("block length must be >= 0");
            r.values.push_back(static_cast<std::uint64_t>(v));
        }
    } else {
        throw ParseError("unknown length rule '" + text + "'");
    }
    return r;
}

AkSeries ak_series_partial(const ExponentRule& ms, const LengthRule& lens, const Dyadic& q, std::int64_t K)
{
    check_q(q);
    if (K < 1)
        throw InvalidArgument("ak_series_partial needs K >= 1");
    AkSeries s;
    double running = 0.0;
    std::optional<Dyadic> exact_running = Dyadic(0);
    for (std::int64_t k = 1; k <= K; ++k) {
        const std::int64_t m = ms.at(k);
        if (m < 0 || m > std::numeric_limits<int>::max())
            throw InvalidArgument("m_k out of range at k = " + std::to_string(k));
        const LengthRule::Length len = lens.at(k);
        AkProbability term;
        if (len.exact) {
            term = ak_probability(static_cast<int>(m), q, *len.exact);
        } else {
            term.approx = ak_probability_approx(static_cast<int>(m), q, len.log2);
        }
        running += term.approx;
        if (exact_running && term.exact) {
            try {
                exact_running = *exact_running + *term.exact;
            } catch (const OverflowError&) {
                exact_running.reset();
            }
        } else {
            exact_running.reset();
        }
        s.terms.push_back(term);
        s.partial.push_back(running);
    }
    s.exact_partial = exact_running;
    const std::size_t n = s.terms.size();
    const std::size_t decade = std::max<std::size_t>(1, n / 10);
    for (std::size_t i = 0; i < decade; ++i) {
        s.first_decade_increment += s.terms[i].approx;
        s.last_decade_increment += s.terms[n - 1 - i].approx;
    }
    s.diverging = s.last_decade_increment >= 0.5 * s.first_decade_increment;
    return s;
}

bool ak_event(const LambdaSet& set, std::int64_t n_lo, std::int64_t n_hi)
{
    for (std::int64_t a = n_lo; a + 1 <= n_hi; ++a) {
        if (set.count_in(DyadicInterval(Dyadic(a), Dyadic(a + 1))) == 0)
            return true;
    }
    return false;
}

bool ak_trial(int m, const Dyadic& q, std::uint64_t block_len, std::uint64_t seed)
{
    check_q(q);
    if (m < 0 || m > 62)
        throw InvalidArgument("ak_trial needs 0 <= m <= 62");
    // Same draws as thin(2^-m N ∩ [n_lo, n_lo + len), 1 - q, seed): rank r is kept iff bernoulli(seed, r, p).
    const Dyadic p = Dyadic(1) - q;
    const std::uint64_t per_window = std::uint64_t{1} << m;
    for (std::uint64_t w = 0; w < block_len; ++w) {
        bool kept = false;
        for (std::uint64_t r = w * per_window + 1; r <= (w + 1) * per_window && !kept; ++r)
            kept = bernoulli(seed, r, p);
        if (!kept)
            return true;
    }
    return false;
}

std::uint64_t ak_monte_carlo(int m, const Dyadic& q, std::uint64_t block_len, const std::vector<std::uint64_t>& seeds)
{
    std::uint64_t hits = 0;
    for (const std::uint64_t seed : seeds)
        hits += ak_trial(m, q, block_len, seed) ? 1 : 0;
    return hits;
}

} // namespace lambdalab
