#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "lambdalab/dyadic.hpp"

namespace lambdalab {

/// Finite union of disjoint half-open dyadic intervals inside [0, 1).
class DyadicSet {
public:
    DyadicSet() = default;
    explicit DyadicSet(std::vector<DyadicInterval> intervals); // sorted, disjoint, within [0, 1)

    [[nodiscard]] const std::vector<DyadicInterval>& intervals() const noexcept { return intervals_; }
    [[nodiscard]] Dyadic measure() const;
    // Largest endpoint exponent: every endpoint lies on the 2^-r grid.
    [[nodiscard]] std::int64_t resolution() const noexcept;
    [[nodiscard]] bool contains(const Dyadic& x) const;

private:
    std::vector<DyadicInterval> intervals_;
};

struct TranslateCount {
    std::uint64_t count = 0; // #((x + 2^n Z) ∩ C)
    Dyadic scaled;           // count · 2^n
};

// x in [0, 1), -62 <= n <= 0.
TranslateCount translate_count(const DyadicSet& C, const Dyadic& x, std::int64_t n);

struct ProfileRow {
    std::int64_t n;
    std::uint64_t count;
    Dyadic scaled;
    bool exact;      // scaled == μ(C)
    bool guaranteed; // -n >= resolution, where exactness is certain
};

struct DensityProfile {
    std::vector<ProfileRow> rows;
    Dyadic measure;
    // First n of the run from which every later row is exact.
    std::optional<std::int64_t> first_exact;
};

// n_values must be strictly decreasing.
DensityProfile density_profile(const DyadicSet& C, const Dyadic& x, const std::vector<std::int64_t>& n_values);

} // namespace lambdalab
