#include "lambdalab/density.hpp"

#include <algorithm>

namespace lambdalab {

DyadicSet::DyadicSet(std::vector<DyadicInterval> intervals) : intervals_(std::move(intervals))
{
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& J = intervals_[i];
        if (J.lo().is_negative() || Dyadic(1) < J.hi())
            throw InvalidArgument("DyadicSet intervals must lie in [0, 1)");
        if (i > 0 && J.lo() < intervals_[i - 1].hi())
            throw InvalidArgument("DyadicSet intervals must be sorted and disjoint");
    }
}

Dyadic DyadicSet::measure() const
{
    Dyadic m(0);
    for (const auto& J : intervals_)
        m += J.length();
    return m;
}

std::int64_t DyadicSet::resolution() const noexcept
{
    std::int64_t r = 0;
    for (const auto& J : intervals_)
        r = std::max({r, J.lo().exponent(), J.hi().exponent()});
    return r;
}

bool DyadicSet::contains(const Dyadic& x) const
{
    for (const auto& J : intervals_) {
        if (J.contains(x))
            return true;
    }
    return false;
}

TranslateCount translate_count(const DyadicSet& C, const Dyadic& x, std::int64_t n)
{
    if (x.is_negative() || !(x < Dyadic(1)))
        throw InvalidArgument("translate_count needs x in [0, 1)");
    if (n > 0 || n < -62)
        throw InvalidArgument("translate_count needs -62 <= n <= 0");
    // Grid points r + i·s, s = 2^n, r = x mod s; #{i : r + i s in [a, b)} = ⌈(b-r)/s⌉ - ⌈(a-r)/s⌉.
    const std::int64_t k = -n;
    const Dyadic r = x - floor_to_grid(x, k);
    TranslateCount out;
    for (const auto& J : C.intervals()) {
        const std::int64_t hi = (J.hi() - r).scaled(k).ceil_int();
        const std::int64_t lo = (J.lo() - r).scaled(k).ceil_int();
        out.count += static_cast<std::uint64_t>(hi - lo);
    }
    out.scaled = Dyadic(static_cast<std::int64_t>(out.count)).scaled(n);
    return out;
}

DensityProfile density_profile(const DyadicSet& C, const Dyadic& x, const std::vector<std::int64_t>& n_values)
{
    DensityProfile p;
    p.measure = C.measure();
    for (std::size_t i = 0; i < n_values.size(); ++i) {
        if (i > 0 && n_values[i] >= n_values[i - 1])
            throw InvalidArgument("density_profile needs strictly decreasing n");
        const auto tc = translate_count(C, x, n_values[i]);
        p.rows.push_back({n_values[i], tc.count, tc.scaled, tc.scaled == p.measure, -n_values[i] >= C.resolution()});
    }
    for (std::size_t i = p.rows.size(); i-- > 0;) {
        if (!p.rows[i].exact)
            break;
        p.first_exact = p.rows[i].n;
    }
    return p;
}

} // namespace lambdalab
