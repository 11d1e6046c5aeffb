#include "lambdalab/random_witness.hpp"

#include <algorithm>

#include "lambdalab/hash.hpp"
#include "lambdalab/parallel.hpp"
#include "lambdalab/sampler.hpp"

namespace lambdalab {

std::optional<std::uint64_t> RefinedPartition::find(const Dyadic& x) const
{
    auto it = std::upper_bound(intervals.begin(), intervals.end(), x,
        [](const Dyadic& v, const DyadicInterval& J) { return v < J.lo(); });
    if (it == intervals.begin())
        return std::nullopt;
    --it;
    if (!it->contains(x))
        return std::nullopt;
    return static_cast<std::uint64_t>(it - intervals.begin()) + 1;
}

RefinedPartition refine_partition(const PiecewiseWitness& f3, const LambdaSet& set, std::int64_t K,
    const DyadicInterval& window)
{
    if (!set.is_dyadic())
        throw InvalidArgument("refine_partition needs a dyadic set");
    if (K < 0 || window.lo() < Dyadic(-K) || Dyadic(K + 1) < window.hi())
        throw InvalidArgument("refinement window must lie in [-K, K + 1)");
    RefinedPartition out;
    out.source = f3;
    out.K = K;
    out.window = window;
    std::uint64_t h = fnv1a("K=" + std::to_string(K) + ";window=" + window.to_string());
    for (const auto& b : f3.blocks()) {
        if (!b.level.is_power_of_two() || Dyadic(1) < b.level)
            throw InvalidArgument("refine_partition needs levels 2^-kappa <= 1, got " + b.level.to_string());
        h = fnv1a(b.interval.to_string() + ":" + b.level.to_string() + ";", h);
        const std::int64_t kappa = -b.level.floor_log2();
        const Dyadic len = b.interval.length();
        const auto gap = set.min_gap(b.interval.lo() - window.hi(), b.interval.hi() - window.lo());
        std::int64_t t = 0;
        if (gap) {
            if (gap->is_zero())
                throw ZeroGap("set has a repeated point");
            while (!(len.scaled(-t) < *gap))
                ++t;
        }
        if (t > 24 || out.intervals.size() + (std::size_t{1} << t) > kMaxPartitionPieces)
            throw RefinementFailed("refinement needs more than 2^24 pieces");
        const Dyadic piece = len.scaled(-t);
        for (std::int64_t i = 0; i < (std::int64_t{1} << t); ++i) {
            const Dyadic lo = b.interval.lo() + piece * Dyadic(i);
            out.intervals.emplace_back(lo, lo + piece);
            out.kappas.push_back(kappa);
        }
    }
    out.provenance_hash = h;
    return out;
}

bool piece_value(const RefinedPartition& p, std::uint64_t seed, std::uint64_t n)
{
    return bernoulli_pow2(seed, n, static_cast<std::uint64_t>(p.kappas.at(n - 1)));
}

int g_eval(const RandomWitness& w, const Dyadic& x)
{
    const auto n = w.partition->find(x);
    return n && piece_value(*w.partition, w.seed, *n) ? 1 : 0;
}

Reach reach(const RefinedPartition& p, const LambdaSet& set, const Dyadic& x, const Dyadic& lambda_max)
{
    Reach r;
    auto take = [&](const Dyadic& lam) {
        if (const auto n = p.find(x + lam)) {
            r.lambdas.push_back(lam);
            r.pieces.push_back(*n);
        }
    };
    for (const auto& b : p.source.blocks()) {
        const Dyadic lo = b.interval.lo() - x;
        if (lambda_max < lo)
            break;
        const Dyadic hi = b.interval.hi() - x;
        const bool cut = lambda_max < hi;
        const Dyadic top = cut ? lambda_max : hi;
        if (lo < top) {
            for (const Dyadic& lam : set.enumerate(DyadicInterval(lo, top)))
                take(lam);
        }
        if (cut && set.contains(lambda_max))
            take(lambda_max);
    }
    return r;
}

HitStats hit_statistics(const RandomWitness& w, const LambdaSet& set, const Dyadic& x, const Dyadic& lambda_max)
{
    const Reach r = reach(*w.partition, set, x, lambda_max);
    HitStats s;
    s.terms = r.lambdas.size();
    for (const auto n : r.pieces) {
        s.expected += w.partition->level(n);
        s.hits += piece_value(*w.partition, w.seed, n) ? 1 : 0;
    }
    return s;
}

EnsembleReport ensemble_report(const RefinedPartition& p, const LambdaSet& set, const std::vector<std::uint64_t>& seeds,
    const std::vector<Dyadic>& c_grid, const std::vector<Dyadic>& d_grid, const std::vector<Dyadic>& horizons,
    unsigned threads)
{
    for (std::size_t i = 1; i < horizons.size(); ++i) {
        if (!(horizons[i - 1] < horizons[i]))
            throw InvalidArgument("horizons must be increasing");
    }
    EnsembleReport rep;
    rep.seed_count = seeds.size();
    if (seeds.empty())
        return rep;

    struct Point {
        char side;
        Dyadic x;
    };
    std::vector<Point> pts;
    for (const auto& x : c_grid)
        pts.push_back({'C', x});
    for (const auto& x : d_grid)
        pts.push_back({'D', x});
    for (const auto& pt : pts) {
        if (!p.window.contains(pt.x))
            throw InvalidArgument("grid point " + pt.x.to_string() + " outside the partition window");
    }
    const std::size_t H = horizons.size();

    // Seed-independent reach and expected sums per point and horizon.
    std::vector<Reach> reaches(pts.size());
    std::vector<std::vector<std::size_t>> cut(pts.size(), std::vector<std::size_t>(H));
    std::vector<std::vector<Dyadic>> expected(pts.size(), std::vector<Dyadic>(H));
    if (H > 0) {
        parallel_for(pts.size(), threads, [&](std::size_t i) {
            reaches[i] = reach(p, set, pts[i].x, horizons.back());
            std::size_t k = 0;
            Dyadic e(0);
            for (std::size_t h = 0; h < H; ++h) {
                while (k < reaches[i].lambdas.size() && reaches[i].lambdas[k] <= horizons[h])
                    e += p.level(reaches[i].pieces[k++]);
                cut[i][h] = k;
                expected[i][h] = e;
            }
        });
    }

    // hits[s][i][h]
    std::vector<std::vector<std::vector<std::uint64_t>>> hits(seeds.size());
    parallel_for(seeds.size(), threads, [&](std::size_t s) {
        hits[s].assign(pts.size(), std::vector<std::uint64_t>(H));
        for (std::size_t i = 0; i < pts.size(); ++i) {
            std::uint64_t n = 0;
            std::size_t k = 0;
            for (std::size_t h = 0; h < H; ++h) {
                for (; k < cut[i][h]; ++k)
                    n += piece_value(p, seeds[s], reaches[i].pieces[k]) ? 1 : 0;
                hits[s][i][h] = n;
            }
        }
    });

    rep.rows.reserve(seeds.size() * pts.size() * H);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t h = 0; h < H; ++h)
                rep.rows.push_back({seeds[s], pts[i].side, pts[i].x, horizons[h], hits[s][i][h], expected[i][h]});
        }
    }
    if (H > 0) {
        const std::size_t base = H / 2 == 0 ? 0 : H / 2 - 1;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            PointSummary sum{pts[i].side, pts[i].x, expected[i][H - 1]};
            std::uint64_t total = 0;
            std::uint64_t stable = 0;
            for (std::size_t s = 0; s < seeds.size(); ++s) {
                total += hits[s][i][H - 1];
                stable += hits[s][i][H - 1] == hits[s][i][base] ? 1 : 0;
            }
            sum.mean_hits = static_cast<double>(total) / static_cast<double>(seeds.size());
            sum.stabilized = static_cast<double>(stable) / static_cast<double>(seeds.size());
            rep.points.push_back(sum);
        }
    }

    rep.pieces.resize(p.size());
    parallel_for(p.size(), threads, [&](std::size_t j) {
        PieceFrequency f{j + 1, p.kappas[j]};
        for (const auto seed : seeds)
            f.ones += piece_value(p, seed, j + 1) ? 1 : 0;
        f.frequency = static_cast<double>(f.ones) / static_cast<double>(seeds.size());
        rep.pieces[j] = f;
    });
    return rep;
}

LacunaryDemo make_lacunary_demo(int J, std::int64_t K)
{
    if (J < 0 || J > 60 || K < 1)
        throw InvalidArgument("lacunary demo needs 0 <= J <= 60 and K >= 1");
    std::vector<Dyadic> pts;
    std::vector<WitnessBlock> blocks;
    for (int j = 0; j <= J; ++j) {
        const Dyadic a = Dyadic::pow2(j);
        pts.push_back(a);
        blocks.push_back({DyadicInterval(a, a + Dyadic(1, 1)), Dyadic(1, 1)});
        blocks.push_back({DyadicInterval(a + Dyadic(1, 1), a + Dyadic(1)), Dyadic::pow2(-(j + 2))});
    }
    LacunaryDemo demo{LambdaSet::explicit_points(std::move(pts)), PiecewiseWitness(std::move(blocks)), K,
        DyadicInterval(Dyadic(-K), Dyadic(K + 1)), {}, {}, {}};
    for (int i = 0; i < 10; ++i) {
        demo.d_grid.push_back(Dyadic(i, 5));
        demo.c_grid.push_back(Dyadic(1, 1) + Dyadic(i, 5));
    }
    for (int j = 0; j <= J; ++j)
        demo.horizons.push_back(Dyadic::pow2(j));
    return demo;
}

} // namespace lambdalab
