#include "lambdalab/lambda_set.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>

#include <mpfr.h>

#include "lambdalab/sampler.hpp"

namespace lambdalab {

namespace {

std::atomic<std::uint64_t> g_cap{kDefaultEnumerationCap};

constexpr int kMaxBlockExponent = 62;

void check_cap(std::uint64_t points)
{
    const std::uint64_t cap = enumeration_cap();
    if (points > cap)
        throw WindowTooLarge("enumeration of " + std::to_string(points) + " points exceeds cap " + std::to_string(cap));
}

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::uint64_t add_counts(std::uint64_t a, std::uint64_t b)
{
    std::uint64_t r = 0;
    if (__builtin_add_overflow(a, b, &r))
        throw OverflowError("point count overflow");
    return r;
}

// Uniform access to the finite block list and the (possibly unbounded) ladder.
class BlockView {
public:
    explicit BlockView(const LambdaSet::Blocks& b) : blocks_(&b) {}
    explicit BlockView(const LambdaSet::Ladder& l) : ladder_(&l) {}

    // nullopt: unbounded.
    [[nodiscard]] std::optional<std::uint64_t> count() const
    {
        if (blocks_)
            return blocks_->blocks.size();
        if (ladder_->k_max)
            return static_cast<std::uint64_t>(std::max<std::int64_t>(0, *ladder_->k_max));
        return std::nullopt;
    }

    [[nodiscard]] DyadicBlock block(std::uint64_t i) const
    {
        if (blocks_)
            return blocks_->blocks[i];
        const auto k = static_cast<std::int64_t>(i) + 1;
        if (k > kMaxBlockExponent)
            throw OverflowError("ladder block beyond k = 62");
        return DyadicBlock{static_cast<int>(k), k, k + 1};
    }

    [[nodiscard]] std::uint64_t before(std::uint64_t i) const
    {
        if (blocks_)
            return blocks_->before[i];
        const std::uint64_t k = i + 1;
        if (k > kMaxBlockExponent)
            throw OverflowError("ladder block beyond k = 62");
        return (std::uint64_t{1} << k) - 2;
    }

    [[nodiscard]] bool exists(std::uint64_t i) const
    {
        const auto n = count();
        return !n || i < *n;
    }

    // Index of the first block whose upper end exceeds v; count() when none.
    [[nodiscard]] std::uint64_t first_ending_after(const Dyadic& v) const
    {
        if (blocks_) {
            const auto& bl = blocks_->blocks;
            const auto it = std::upper_bound(bl.begin(), bl.end(), v,
                [](const Dyadic& x, const DyadicBlock& b) { return x < Dyadic(b.n_hi); });
            return static_cast<std::uint64_t>(it - bl.begin());
        }
        // Ladder block k covers [k, k+1).
        if (v < Dyadic(1))
            return 0;
        const auto n = count();
        if (n && v >= Dyadic(static_cast<std::int64_t>(*n) + 1))
            return *n;
        if (v >= Dyadic(kMaxBlockExponent + 1))
            throw OverflowError("ladder query beyond k = 62");
        return static_cast<std::uint64_t>(v.floor_int() - 1);
    }

    // Index of the block holding the given 1-based rank.
    [[nodiscard]] std::uint64_t block_of_rank(std::uint64_t rank) const
    {
        if (blocks_) {
            const auto& b = blocks_->before;
            const auto it = std::upper_bound(b.begin(), b.end(), rank - 1);
            return static_cast<std::uint64_t>(it - b.begin()) - 1;
        }
        // Ranks of block k are 2^k - 1 .. 2^(k+1) - 2.
        const int k = bit_length(static_cast<u128>(rank) + 1) - 1;
        return static_cast<std::uint64_t>(k - 1);
    }

    [[nodiscard]] std::uint64_t total() const
    {
        const auto n = count();
        if (!n)
            throw InvalidArgument("unbounded set has no total count");
        if (*n == 0)
            return 0;
        return add_counts(before(*n - 1), block(*n - 1).size());
    }

    [[nodiscard]] std::uint64_t count_before(const Dyadic& v) const
    {
        const std::uint64_t i = first_ending_after(v);
        if (!exists(i))
            return total();
        const DyadicBlock b = block(i);
        std::uint64_t cnt = before(i);
        if (v > Dyadic(b.n_lo)) {
            const std::int64_t j = (v - Dyadic(b.n_lo)).scaled(b.m).ceil_int();
            cnt = add_counts(cnt, static_cast<std::uint64_t>(j));
        }
        return cnt;
    }

    [[nodiscard]] bool contains(const Dyadic& v) const
    {
        const std::uint64_t i = first_ending_after(v);
        if (!exists(i))
            return false;
        const DyadicBlock b = block(i);
        return v >= Dyadic(b.n_lo) && v.exponent() <= b.m;
    }

    [[nodiscard]] Dyadic point(std::uint64_t block_index, std::uint64_t offset) const
    {
        const DyadicBlock b = block(block_index);
        return Dyadic(b.n_lo) + Dyadic(static_cast<i128>(offset), b.m);
    }

    [[nodiscard]] std::optional<Dyadic> point_at(std::uint64_t rank) const
    {
        if (rank == 0)
            return std::nullopt;
        const auto n = count();
        if (n && rank > total())
            return std::nullopt;
        const std::uint64_t i = block_of_rank(rank);
        return point(i, rank - 1 - before(i));
    }

    // Calls fn for ranks first..last (inclusive).
    template <class Fn>
    void for_ranks(std::uint64_t first, std::uint64_t last, Fn&& fn) const
    {
        if (first > last)
            return;
        std::uint64_t i = block_of_rank(first);
        DyadicBlock b = block(i);
        std::uint64_t offset = first - 1 - before(i);
        std::uint64_t size = b.size();
        i128 base = static_cast<i128>(b.n_lo) << b.m;
        for (std::uint64_t r = first; r <= last; ++r) {
            if (offset == size) {
                ++i;
                b = block(i);
                offset = 0;
                size = b.size();
                base = static_cast<i128>(b.n_lo) << b.m;
            }
            fn(IndexedPoint{r, Dyadic(base + static_cast<i128>(offset), b.m)});
            ++offset;
        }
    }

    // Smallest and largest gap between consecutive ranks in [first, last].
    [[nodiscard]] std::pair<std::optional<Dyadic>, std::optional<Dyadic>> gaps(std::uint64_t first,
        std::uint64_t last) const
    {
        std::optional<Dyadic> lo_gap;
        std::optional<Dyadic> hi_gap;
        if (first == 0 || last <= first)
            return {lo_gap, hi_gap};
        auto consider = [&](const Dyadic& g) {
            if (!lo_gap || g < *lo_gap)
                lo_gap = g;
            if (!hi_gap || g > *hi_gap)
                hi_gap = g;
        };
        std::uint64_t i = block_of_rank(first);
        std::uint64_t r = first;
        while (r <= last) {
            const DyadicBlock b = block(i);
            const std::uint64_t block_last = before(i) + b.size();
            const std::uint64_t seg_last = std::min(last, block_last);
            if (seg_last > r)
                consider(Dyadic::pow2(-b.m));
            if (seg_last == last)
                break;
            // Gap across the block boundary.
            consider(*point_at(seg_last + 1) - *point_at(seg_last));
            r = seg_last + 1;
            ++i;
        }
        return {lo_gap, hi_gap};
    }

private:
    const LambdaSet::Blocks* blocks_ = nullptr;
    const LambdaSet::Ladder* ladder_ = nullptr;
};

std::optional<BlockView> block_view(const LambdaSet::Kind& kind)
{
    if (const auto* b = std::get_if<LambdaSet::Blocks>(&kind))
        return BlockView(*b);
    if (const auto* l = std::get_if<LambdaSet::Ladder>(&kind))
        return BlockView(*l);
    return std::nullopt;
}

const LambdaSet::Thinned* as_thinned(const LambdaSet::Kind& kind)
{
    return std::get_if<LambdaSet::Thinned>(&kind);
}

} // namespace

std::uint64_t enumeration_cap() noexcept { return g_cap.load(std::memory_order_relaxed); }
void set_enumeration_cap(std::uint64_t cap) noexcept { g_cap.store(cap, std::memory_order_relaxed); }

std::uint64_t DyadicBlock::size() const
{
    if (m < 0 || m > kMaxBlockExponent)
        throw InvalidArgument("block exponent m must lie in [0, 62]");
    const auto len = static_cast<u128>(n_hi - n_lo);
    const u128 s = len << m;
    if (s > std::numeric_limits<std::uint64_t>::max())
        throw OverflowError("block point count exceeds 64 bits");
    return static_cast<std::uint64_t>(s);
}

std::uint64_t floor_exp(const Dyadic& v)
{
    if (!v.is_positive())
        throw InvalidArgument("floor_exp expects v > 0");
    if (v >= Dyadic(45)) // e^45 > 2^64
        return std::numeric_limits<std::uint64_t>::max();
    const std::string digits = i128_to_string(v.mantissa());
    for (mpfr_prec_t prec = 192; prec <= 8192; prec *= 2) {
        mpfr_t x, lo, hi;
        mpfr_inits2(prec, x, lo, hi, static_cast<mpfr_ptr>(nullptr));
        mpfr_set_str(x, digits.c_str(), 10, MPFR_RNDN); // exact: mantissa has <= 127 bits
        mpfr_div_2si(x, x, static_cast<long>(v.exponent()), MPFR_RNDN);
        mpfr_exp(lo, x, MPFR_RNDD);
        mpfr_exp(hi, x, MPFR_RNDU);
        const std::uint64_t flo = mpfr_get_uj(lo, MPFR_RNDD);
        const std::uint64_t fhi = mpfr_get_uj(hi, MPFR_RNDD);
        mpfr_clears(x, lo, hi, static_cast<mpfr_ptr>(nullptr));
        if (flo == fhi)
            return flo;
    }
    throw OverflowError("floor_exp: could not separate e^v from an integer");
}

LambdaSet LambdaSet::dyadic_blocks(std::vector<DyadicBlock> blocks)
{
    Blocks b;
    std::uint64_t total = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const DyadicBlock& blk = blocks[i];
        if (blk.n_lo < 0)
            throw InvalidArgument("dyadic block must start at n_lo >= 0");
        if (blk.n_hi <= blk.n_lo)
            throw InvalidArgument("dyadic block needs n_lo < n_hi");
        if (i > 0 && blk.n_lo < blocks[i - 1].n_hi)
            throw InvalidArgument("dyadic blocks must be ordered and non-overlapping");
        b.before.push_back(total);
        total = add_counts(total, blk.size());
    }
    b.blocks = std::move(blocks);
    return LambdaSet(Kind(std::move(b)));
}

LambdaSet LambdaSet::ladder(std::optional<std::int64_t> k_max)
{
    if (k_max && (*k_max < 0 || *k_max > kMaxBlockExponent))
        throw InvalidArgument("ladder k_max must lie in [0, 62]");
    return LambdaSet(Kind(Ladder{k_max}));
}

LambdaSet LambdaSet::log_integers(std::uint64_t max_n)
{
    if (max_n == 0)
        throw InvalidArgument("log-integers needs max_n >= 1");
    return LambdaSet(Kind(LogIntegers{max_n}));
}

LambdaSet LambdaSet::explicit_points(std::vector<Dyadic> points)
{
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (!(points[i - 1] < points[i]))
            throw InvalidArgument("explicit points must be strictly increasing");
    }
    return LambdaSet(Kind(Explicit{std::move(points)}));
}

LambdaSet thin(const LambdaSet& base, const Dyadic& p, std::uint64_t seed)
{
    if (base.is_thinned())
        throw NestedThinning("thinning an already thinned set is not supported");
    if (!(p.is_positive() && p < Dyadic(1)))
        throw InvalidArgument("thinning probability must lie in (0, 1)");
    return LambdaSet(LambdaSet::Kind(LambdaSet::Thinned{std::make_shared<const LambdaSet>(base), p, seed}));
}

bool LambdaSet::is_dyadic() const noexcept
{
    if (std::holds_alternative<LogIntegers>(kind_))
        return false;
    if (const auto* t = as_thinned(kind_))
        return t->base->is_dyadic();
    return true;
}

std::optional<std::uint64_t> LambdaSet::size() const
{
    return std::visit(Overloaded{
                          [](const Blocks& b) -> std::optional<std::uint64_t> { return BlockView(b).total(); },
                          [](const Ladder& l) -> std::optional<std::uint64_t> {
                              if (!l.k_max)
                                  return std::nullopt;
                              return BlockView(l).total();
                          },
                          [](const LogIntegers& l) -> std::optional<std::uint64_t> { return l.max_n; },
                          [](const Explicit& e) -> std::optional<std::uint64_t> { return e.points.size(); },
                          [](const Thinned& t) -> std::optional<std::uint64_t> {
                              const auto n = t.base->size();
                              if (!n)
                                  return std::nullopt;
                              check_cap(*n);
                              std::uint64_t kept = 0;
                              for (std::uint64_t r = 1; r <= *n; ++r)
                                  kept += bernoulli(t.seed, r, t.p) ? 1 : 0;
                              return kept;
                          },
                      },
        kind_);
}

std::uint64_t LambdaSet::count_before(const Dyadic& v) const
{
    if (auto bv = block_view(kind_))
        return bv->count_before(v);
    return std::visit(Overloaded{
                          [&](const LogIntegers& l) -> std::uint64_t {
                              if (!v.is_positive())
                                  return 0;
                              return std::min(l.max_n, floor_exp(v));
                          },
                          [&](const Explicit& e) -> std::uint64_t {
                              return static_cast<std::uint64_t>(
                                  std::lower_bound(e.points.begin(), e.points.end(), v) - e.points.begin());
                          },
                          [&](const Thinned& t) -> std::uint64_t {
                              const std::uint64_t n = t.base->count_before(v);
                              check_cap(n);
                              std::uint64_t kept = 0;
                              for (std::uint64_t r = 1; r <= n; ++r)
                                  kept += bernoulli(t.seed, r, t.p) ? 1 : 0;
                              return kept;
                          },
                          [](const auto&) -> std::uint64_t { return 0; },
                      },
        kind_);
}

std::uint64_t LambdaSet::count_in(const Dyadic& x, const Dyadic& a) const
{
    if (!a.is_positive())
        throw InvalidArgument("count_in needs a > 0");
    return count_in(DyadicInterval(x, x + a));
}

std::uint64_t LambdaSet::count_in(const DyadicInterval& window) const
{
    if (const auto* t = as_thinned(kind_)) {
        const std::uint64_t first = t->base->count_before(window.lo()) + 1;
        const std::uint64_t last = t->base->count_before(window.hi());
        if (last >= first)
            check_cap(last - first + 1);
        std::uint64_t kept = 0;
        for (std::uint64_t r = first; r <= last; ++r)
            kept += bernoulli(t->seed, r, t->p) ? 1 : 0;
        return kept;
    }
    return count_before(window.hi()) - count_before(window.lo());
}

std::uint64_t LambdaSet::count_closed(const Dyadic& lo, const Dyadic& hi) const
{
    if (hi < lo)
        return 0;
    std::uint64_t n = lo == hi ? 0 : count_in(DyadicInterval(lo, hi));
    if (contains(hi))
        ++n;
    return n;
}

bool LambdaSet::contains(const Dyadic& v) const
{
    if (auto bv = block_view(kind_))
        return bv->contains(v);
    return std::visit(Overloaded{
                          [&](const LogIntegers&) { return v.is_zero(); }, // ln n is dyadic only for n = 1
                          [&](const Explicit& e) { return std::binary_search(e.points.begin(), e.points.end(), v); },
                          [&](const Thinned& t) {
                              if (!t.base->contains(v))
                                  return false;
                              return bernoulli(t.seed, t.base->count_before(v) + 1, t.p);
                          },
                          [](const auto&) { return false; },
                      },
        kind_);
}

std::optional<Dyadic> LambdaSet::point_at(std::uint64_t rank) const
{
    if (auto bv = block_view(kind_))
        return bv->point_at(rank);
    return std::visit(Overloaded{
                          [&](const LogIntegers& l) -> std::optional<Dyadic> {
                              if (rank == 1)
                                  return Dyadic(0);
                              if (rank == 0 || rank > l.max_n)
                                  return std::nullopt;
                              throw NotDyadic("ln n is not dyadic for n > 1");
                          },
                          [&](const Explicit& e) -> std::optional<Dyadic> {
                              if (rank == 0 || rank > e.points.size())
                                  return std::nullopt;
                              return e.points[rank - 1];
                          },
                          [&](const Thinned& t) -> std::optional<Dyadic> {
                              if (rank == 0)
                                  return std::nullopt;
                              std::uint64_t kept = 0;
                              for (std::uint64_t r = 1;; ++r) {
                                  if (r > enumeration_cap())
                                      check_cap(r);
                                  const auto pt = t.base->point_at(r);
                                  if (!pt)
                                      return std::nullopt;
                                  if (bernoulli(t.seed, r, t.p) && ++kept == rank)
                                      return pt;
                              }
                          },
                          [](const auto&) -> std::optional<Dyadic> { return std::nullopt; },
                      },
        kind_);
}

std::optional<Dyadic> LambdaSet::first_from(const Dyadic& v, bool strict) const
{
    if (const auto* t = as_thinned(kind_)) {
        std::uint64_t r = t->base->count_before(v) + 1;
        for (std::uint64_t steps = 0;; ++r, ++steps) {
            if (steps > enumeration_cap())
                check_cap(steps);
            const auto pt = t->base->point_at(r);
            if (!pt)
                return std::nullopt;
            if (strict && *pt == v)
                continue;
            if (bernoulli(t->seed, r, t->p))
                return pt;
        }
    }
    std::uint64_t rank = count_before(v) + 1;
    auto pt = point_at(rank);
    if (pt && strict && *pt == v)
        pt = point_at(rank + 1);
    return pt;
}

void LambdaSet::for_each(const DyadicInterval& window, const std::function<void(const IndexedPoint&)>& fn) const
{
    if (auto bv = block_view(kind_)) {
        const std::uint64_t first = bv->count_before(window.lo()) + 1;
        const std::uint64_t last = bv->count_before(window.hi());
        if (last >= first)
            check_cap(last - first + 1);
        bv->for_ranks(first, last, fn);
        return;
    }
    std::visit(Overloaded{
                   [&](const LogIntegers&) {
                       if (window.contains(Dyadic(0)))
                           fn(IndexedPoint{1, Dyadic(0)});
                       if (count_in(window) > (window.contains(Dyadic(0)) ? 1U : 0U))
                           throw NotDyadic("log-integer points other than ln 1 are not dyadic");
                   },
                   [&](const Explicit& e) {
                       const auto lo = std::lower_bound(e.points.begin(), e.points.end(), window.lo());
                       const auto hi = std::lower_bound(lo, e.points.end(), window.hi());
                       check_cap(static_cast<std::uint64_t>(hi - lo));
                       for (auto it = lo; it != hi; ++it)
                           fn(IndexedPoint{static_cast<std::uint64_t>(it - e.points.begin()) + 1, *it});
                   },
                   [&](const Thinned& t) {
                       std::uint64_t rank = count_before(window.lo());
                       t.base->for_each(window, [&](const IndexedPoint& bp) {
                           if (bernoulli(t.seed, bp.rank, t.p))
                               fn(IndexedPoint{++rank, bp.point});
                       });
                   },
                   [](const auto&) {},
               },
        kind_);
}

std::vector<IndexedPoint> LambdaSet::enumerate_indexed(const DyadicInterval& window) const
{
    std::vector<IndexedPoint> out;
    for_each(window, [&](const IndexedPoint& p) { out.push_back(p); });
    return out;
}

std::vector<Dyadic> LambdaSet::enumerate(const DyadicInterval& window) const
{
    std::vector<Dyadic> out;
    if (const auto* t = as_thinned(kind_)) {
        // Membership only depends on the base rank; no need to rank the thinned set.
        t->base->for_each(window, [&](const IndexedPoint& bp) {
            if (bernoulli(t->seed, bp.rank, t->p))
                out.push_back(bp.point);
        });
        return out;
    }
    for_each(window, [&](const IndexedPoint& p) { out.push_back(p.point); });
    return out;
}

std::vector<double> LambdaSet::enumerate_real(const DyadicInterval& window) const
{
    if (const auto* l = std::get_if<LogIntegers>(&kind_)) {
        const std::uint64_t first = count_before(window.lo()) + 1;
        const std::uint64_t last = std::min(l->max_n, count_before(window.hi()));
        std::vector<double> out;
        if (last < first)
            return out;
        check_cap(last - first + 1);
        out.reserve(last - first + 1);
        for (std::uint64_t n = first; n <= last; ++n)
            out.push_back(std::log(static_cast<double>(n)));
        return out;
    }
    std::vector<double> out;
    for (const Dyadic& d : enumerate(window))
        out.push_back(d.to_double());
    return out;
}

std::optional<Dyadic> LambdaSet::min_gap(const Dyadic& lo, const Dyadic& hi) const
{
    if (hi < lo)
        return std::nullopt;
    if (auto bv = block_view(kind_)) {
        const std::uint64_t first = bv->count_before(lo) + 1;
        const std::uint64_t last = bv->count_before(hi) + (bv->contains(hi) ? 1 : 0);
        return bv->gaps(first, last).first;
    }
    std::vector<Dyadic> pts = lo == hi ? std::vector<Dyadic>{} : enumerate(DyadicInterval(lo, hi));
    if (contains(hi))
        pts.push_back(hi);
    std::optional<Dyadic> best;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const Dyadic g = pts[i] - pts[i - 1];
        if (g.is_zero())
            throw ZeroGap("set contains a repeated point " + pts[i].to_string());
        if (!best || g < *best)
            best = g;
    }
    return best;
}

std::optional<Dyadic> LambdaSet::max_gap(const DyadicInterval& window) const
{
    if (auto bv = block_view(kind_)) {
        const std::uint64_t first = bv->count_before(window.lo()) + 1;
        const std::uint64_t last = bv->count_before(window.hi());
        return bv->gaps(first, last).second;
    }
    if (!is_dyadic())
        throw NotDyadic("max_gap needs a dyadic set; use the binary64 variant");
    std::optional<Dyadic> prev;
    std::optional<Dyadic> best;
    const auto visit = [&](const Dyadic& pt) {
        if (prev) {
            const Dyadic g = pt - *prev;
            if (!best || g > *best)
                best = g;
        }
        prev = pt;
    };
    if (const auto* t = as_thinned(kind_)) {
        t->base->for_each(window, [&](const IndexedPoint& bp) {
            if (bernoulli(t->seed, bp.rank, t->p))
                visit(bp.point);
        });
    } else {
        for_each(window, [&](const IndexedPoint& p) { visit(p.point); });
    }
    return best;
}

std::optional<int> LambdaSet::unit_growth_exponent() const
{
    if (const auto* l = std::get_if<Ladder>(&kind_))
        return l->k_max ? std::nullopt : std::optional<int>(1);
    if (const auto* t = as_thinned(kind_))
        return t->base->unit_growth_exponent();
    return std::nullopt;
}

} // namespace lambdalab
