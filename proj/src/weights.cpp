#include "lambdalab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace lambdalab {

int compare(const Fraction& a, const Fraction& b)
{
    const Dyadic lhs = a.num * b.den;
    const Dyadic rhs = b.num * a.den;
    return (lhs > rhs) - (lhs < rhs);
}

int compare(const Fraction& a, const Dyadic& b)
{
    return compare(a, Fraction{b, Dyadic(1)});
}

// ---- WideDyadic ------------------------------------------------------------

WideDyadic::WideDyadic(const Dyadic& d)
{
    if (d.is_negative())
        throw InvalidArgument("WideDyadic needs a nonnegative value");
    const auto m = static_cast<u128>(d.mantissa());
    for (int b = bit_length(m) - 1; b >= 0; --b) {
        if ((m >> b) & 1U)
            positions_.push_back(d.exponent() - b);
    }
}

WideDyadic WideDyadic::from_positions(std::vector<std::int64_t> strictly_increasing)
{
    for (std::size_t i = 1; i < strictly_increasing.size(); ++i) {
        if (strictly_increasing[i] <= strictly_increasing[i - 1])
            throw InvalidArgument("WideDyadic positions must be strictly increasing");
    }
    WideDyadic w;
    w.positions_ = std::move(strictly_increasing);
    return w;
}

WideDyadic WideDyadic::scaled(std::int64_t k) const
{
    WideDyadic w = *this;
    for (auto& p : w.positions_)
        p -= k;
    return w;
}

Dyadic WideDyadic::to_dyadic() const
{
    if (positions_.empty())
        return Dyadic(0);
    if (positions_.back() - positions_.front() > 126)
        throw OverflowError("WideDyadic spans more than 127 bits");
    Dyadic sum(0);
    for (const auto p : positions_)
        sum += Dyadic::pow2(-p);
    return sum;
}

double WideDyadic::log2() const
{
    if (positions_.empty())
        return -std::numeric_limits<double>::infinity();
    const std::int64_t top = positions_.front();
    double mant = 0.0;
    for (const auto p : positions_) {
        if (p - top > 60)
            break;
        mant += std::ldexp(1.0, static_cast<int>(-(p - top)));
    }
    return std::log2(mant) - static_cast<double>(top);
}

WideDyadic operator+(const WideDyadic& a, const WideDyadic& b)
{
    std::map<std::int64_t, int> count;
    for (const auto p : a.positions_)
        ++count[p];
    for (const auto p : b.positions_)
        ++count[p];
    // Carry from the least significant bit (largest position) upwards.
    for (auto it = count.rbegin(); it != count.rend(); ++it) {
        if (it->second >= 2) {
            count[it->first - 1] += it->second / 2;
            it->second %= 2;
        }
    }
    WideDyadic out;
    for (const auto& [p, c] : count) {
        if (c == 1)
            out.positions_.push_back(p);
    }
    return out;
}

std::strong_ordering operator<=>(const WideDyadic& a, const WideDyadic& b) noexcept
{
    const std::size_t n = std::min(a.positions_.size(), b.positions_.size());
    for (std::size_t i = 0; i < n; ++i) {
        if (a.positions_[i] != b.positions_[i])
            return a.positions_[i] < b.positions_[i] ? std::strong_ordering::greater : std::strong_ordering::less;
    }
    return a.positions_.size() <=> b.positions_.size();
}

// ---- WeightSeq -------------------------------------------------------------

WeightSeq WeightSeq::ones()
{
    return WeightSeq{};
}

WeightSeq WeightSeq::geometric(const Dyadic& r)
{
    if (!(r.is_positive() && r < Dyadic(1)))
        throw InvalidArgument("geometric ratio must lie in (0, 1)");
    WeightSeq w;
    w.rule_ = Rule::Geometric;
    w.ratio_ = r;
    return w;
}

WeightSeq WeightSeq::superexp()
{
    WeightSeq w;
    w.rule_ = Rule::SuperExp;
    return w;
}

WeightSeq WeightSeq::table(std::vector<Dyadic> values)
{
    if (values.empty())
        throw InvalidArgument("weight table is empty");
    for (const auto& v : values) {
        if (!v.is_positive())
            throw InvalidArgument("weights must be positive");
    }
    WeightSeq w;
    w.rule_ = Rule::Table;
    w.table_ = std::move(values);
    return w;
}

WeightSeq WeightSeq::parse(const std::string& text)
{
    if (text == "ones")
        return ones();
    if (text == "superexp")
        return superexp();
    try {
        if (text.rfind("geometric:", 0) == 0)
            return geometric(Dyadic::parse(text.substr(10)));
        if (text.rfind("table:", 0) == 0) {
            std::vector<Dyadic> values;
            std::stringstream ss(text.substr(6));
            std::string item;
            while (std::getline(ss, item, ','))
                values.push_back(Dyadic::parse(item));
            return table(std::move(values));
        }
    } catch (const InvalidArgument& e) {
        throw ParseError(std::string("weights '") + text + "': " + e.what());
    }
    throw ParseError("unknown weight rule '" + text + "'");
}

std::string WeightSeq::to_string() const
{
    switch (rule_) {
    case Rule::Ones:
        return "ones";
    case Rule::SuperExp:
        return "superexp";
    case Rule::Geometric:
        return "geometric:" + ratio_.to_string();
    case Rule::Table: {
        std::string s = "table:";
        for (std::size_t i = 0; i < table_.size(); ++i)
            s += (i ? "," : "") + table_[i].to_string();
        return s;
    }
    }
    return "ones";
}

namespace {

void check_index(std::uint64_t n)
{
    if (n == 0)
        throw InvalidArgument("weights are indexed from 1");
}

std::int64_t square_exponent(std::uint64_t n)
{
    if (n > 3'000'000'000ULL)
        throw OverflowError("superexp index too large");
    return static_cast<std::int64_t>(n * n);
}

} // namespace

Dyadic WeightSeq::at(std::uint64_t n) const
{
    check_index(n);
    switch (rule_) {
    case Rule::Ones:
        return Dyadic(1);
    case Rule::Geometric:
        return dyadic_pow(ratio_, n);
    case Rule::SuperExp:
        return Dyadic::pow2(-square_exponent(n));
    case Rule::Table:
        if (n > table_.size())
            throw InvalidArgument("weight table exhausted at n = " + std::to_string(n));
        return table_[n - 1];
    }
    return Dyadic(1);
}

std::optional<std::uint64_t> WeightSeq::length() const
{
    if (rule_ == Rule::Table)
        return table_.size();
    return std::nullopt;
}

std::optional<Fraction> WeightSeq::tail_bound(std::uint64_t n) const
{
    switch (rule_) {
    case Rule::Ones:
        return std::nullopt;
    case Rule::Geometric:
        return Fraction{dyadic_pow(ratio_, n + 1), Dyadic(1) - ratio_};
    case Rule::SuperExp: {
        // Σ_{j>n} 2^-(j²) <= 2^-(n+1)² (1 + 2^-(2n+2)): later terms shrink by 2^-(2n+3) or faster.
        const std::int64_t head = square_exponent(n + 1);
        if (n <= 62)
            return Fraction{Dyadic((static_cast<i128>(1) << (2 * n + 2)) + 1, head + 2 * static_cast<std::int64_t>(n) + 2),
                Dyadic(1)};
        return Fraction{Dyadic::pow2(1 - head), Dyadic(1)};
    }
    case Rule::Table: {
        Dyadic sum(0);
        for (std::uint64_t j = n + 1; j <= table_.size(); ++j)
            sum += table_[j - 1];
        return Fraction{sum, Dyadic(1)};
    }
    }
    return std::nullopt;
}

bool WeightSeq::distinct_bits() const noexcept
{
    return rule_ == Rule::SuperExp || (rule_ == Rule::Geometric && ratio_.is_power_of_two());
}

std::int64_t WeightSeq::bit_position(std::uint64_t j) const
{
    check_index(j);
    if (rule_ == Rule::SuperExp)
        return square_exponent(j);
    if (rule_ == Rule::Geometric && ratio_.is_power_of_two()) {
        const std::int64_t s = -ratio_.floor_log2();
        if (j > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max() / s))
            throw OverflowError("geometric bit position overflows");
        return s * static_cast<std::int64_t>(j);
    }
    throw InvalidArgument("weight rule has no single-bit terms");
}

WideDyadic WeightSeq::wide_at(std::uint64_t n) const
{
    if (distinct_bits())
        return WideDyadic::from_positions({bit_position(n)});
    return WideDyadic(at(n));
}

// ---- RangeSum --------------------------------------------------------------

RangeSum::RangeSum(const WeightSeq& weights, std::uint64_t first, std::uint64_t last)
    : weights_(&weights), first_(first), last_(last)
{
    if (first == 0)
        throw InvalidArgument("weights are indexed from 1");
    if (empty() || weights.distinct_bits())
        return;
    std::optional<Dyadic> narrow = Dyadic(0);
    WideDyadic wide;
    for (std::uint64_t j = first; j <= last; ++j) {
        if (narrow) {
            try {
                *narrow += weights.at(j);
                continue;
            } catch (const OverflowError&) {
                wide = WideDyadic(*narrow);
                narrow.reset();
            }
        }
        wide += weights.wide_at(j);
    }
    wide_ = narrow ? WideDyadic(*narrow) : wide;
}

std::uint64_t RangeSum::bit_count() const noexcept
{
    if (empty())
        return 0;
    return wide_ ? wide_->positions().size() : size();
}

std::int64_t RangeSum::bit(std::uint64_t i) const
{
    return wide_ ? wide_->positions()[i] : weights_->bit_position(first_ + i);
}

WideDyadic RangeSum::materialize() const
{
    if (wide_)
        return *wide_;
    std::vector<std::int64_t> pos;
    pos.reserve(bit_count());
    for (std::uint64_t i = 0; i < bit_count(); ++i)
        pos.push_back(bit(i));
    return WideDyadic::from_positions(std::move(pos));
}

int compare(const RangeSum& a, std::int64_t shift_a, const RangeSum& b)
{
    if (a.empty() || b.empty())
        return (!a.empty()) - (!b.empty());
    // Same single-bit rule, no shift: the range that starts earlier holds the larger top bit.
    if (shift_a == 0 && a.weights() == b.weights() && a.weights().distinct_bits()) {
        if (a.first() != b.first())
            return a.first() < b.first() ? 1 : -1;
        return (a.last() > b.last()) - (a.last() < b.last());
    }
    const std::uint64_t na = a.bit_count();
    const std::uint64_t nb = b.bit_count();
    std::uint64_t i = 0;
    for (; i < na && i < nb; ++i) {
        const std::int64_t pa = a.bit(i) - shift_a;
        const std::int64_t pb = b.bit(i);
        if (pa != pb)
            return pa < pb ? 1 : -1;
    }
    return (na > i) - (nb > i);
}

namespace {

// (top position, mantissa in [1, 2)) of a nonempty sum.
std::pair<std::int64_t, double> leading(const RangeSum& s)
{
    const std::int64_t top = s.bit(0);
    double mant = 0.0;
    for (std::uint64_t i = 0; i < s.bit_count(); ++i) {
        const std::int64_t d = s.bit(i) - top;
        if (d > 60)
            break;
        mant += std::ldexp(1.0, static_cast<int>(-d));
    }
    return {top, mant};
}

} // namespace

double ratio_approx(const RangeSum& a, const RangeSum& b)
{
    if (b.empty())
        throw InvalidArgument("ratio_approx: empty denominator");
    if (a.empty())
        return 0.0;
    const auto [ta, ma] = leading(a);
    const auto [tb, mb] = leading(b);
    const std::int64_t e = tb - ta;
    if (e < -2000)
        return 0.0;
    if (e > 2000)
        return std::numeric_limits<double>::infinity();
    return std::ldexp(ma / mb, static_cast<int>(e));
}

double log2_approx(const RangeSum& s)
{
    if (s.empty())
        return -std::numeric_limits<double>::infinity();
    const auto [top, mant] = leading(s);
    return std::log2(mant) - static_cast<double>(top);
}

} // namespace lambdalab
