#include "lognpce/multiindex.hpp"

#include "lognpce/summation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>
#include <unordered_set>

namespace lognpce {

MultiIndex MultiIndex::unit(std::uint32_t j, std::uint32_t degree) {
    if (j == 0)
        throw std::invalid_argument("MultiIndex coordinates start at 1");
    MultiIndex nu;
    if (degree > 0)
        nu.entries_.emplace_back(j, degree);
    return nu;
}

MultiIndex MultiIndex::from_entries(std::vector<Entry> entries) {
    std::erase_if(entries, [](const Entry& e) { return e.second == 0; });
    std::sort(entries.begin(), entries.end());
    for (std::size_t k = 0; k < entries.size(); ++k) {
        if (entries[k].first == 0)
            throw std::invalid_argument("MultiIndex coordinates start at 1");
        if (k > 0 && entries[k].first == entries[k - 1].first)
            throw std::invalid_argument("duplicate coordinate in MultiIndex");
    }
    MultiIndex nu;
    nu.entries_ = std::move(entries);
    return nu;
}

MultiIndex MultiIndex::from_dense(std::span<const std::uint32_t> degrees) {
    MultiIndex nu;
    for (std::size_t i = 0; i < degrees.size(); ++i)
        if (degrees[i] > 0)
            nu.entries_.emplace_back(static_cast<std::uint32_t>(i + 1), degrees[i]);
    return nu;
}

std::uint32_t MultiIndex::degree(std::uint32_t j) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), j,
                               [](const Entry& e, std::uint32_t v) { return e.first < v; });
    return (it != entries_.end() && it->first == j) ? it->second : 0;
}

std::uint64_t MultiIndex::order() const {
    std::uint64_t sum = 0;
    for (const auto& [j, d] : entries_)
        sum += d;
    return sum;
}

std::uint32_t MultiIndex::max_degree() const {
    std::uint32_t m = 0;
    for (const auto& [j, d] : entries_)
        m = std::max(m, d);
    return m;
}

std::uint32_t MultiIndex::max_coordinate() const {
    return entries_.empty() ? 0 : entries_.back().first;
}

MultiIndex MultiIndex::with_increment(std::uint32_t j, std::int64_t delta) const {
    if (j == 0)
        throw std::invalid_argument("MultiIndex coordinates start at 1");
    MultiIndex out = *this;
    auto it = std::lower_bound(out.entries_.begin(), out.entries_.end(), j,
                               [](const Entry& e, std::uint32_t v) { return e.first < v; });
    const std::int64_t current = (it != out.entries_.end() && it->first == j) ? it->second : 0;
    const std::int64_t next = current + delta;
    if (next < 0)
        throw std::invalid_argument("MultiIndex degree would become negative");
    if (it != out.entries_.end() && it->first == j) {
        if (next == 0)
            out.entries_.erase(it);
        else
            it->second = static_cast<std::uint32_t>(next);
    } else if (next > 0) {
        out.entries_.insert(it, Entry{j, static_cast<std::uint32_t>(next)});
    }
    return out;
}

bool MultiIndex::leq(const MultiIndex& other) const {
    for (const auto& [j, d] : entries_)
        if (d > other.degree(j))
            return false;
    return true;
}

double MultiIndex::factorial_as_double() const {
    double fac = 1.0;
    for (const auto& [j, d] : entries_)
        for (std::uint32_t k = 2; k <= d; ++k)
            fac *= static_cast<double>(k);
    return fac;
}

std::size_t MultiIndex::hash() const {
    // FNV-1a over the sparse entries
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](std::uint64_t v) {
        h ^= v;
        h *= 1099511628211ull;
    };
    for (const auto& [j, d] : entries_) {
        mix(j);
        mix(d);
    }
    return static_cast<std::size_t>(h);
}

std::string MultiIndex::to_string() const {
    if (entries_.empty())
        return "0";
    std::string out;
    for (std::size_t k = 0; k < entries_.size(); ++k) {
        if (k > 0)
            out += ';';
        out += std::to_string(entries_[k].first);
        out += ':';
        out += std::to_string(entries_[k].second);
    }
    return out;
}

MultiIndex MultiIndex::parse(const std::string& text) {
    if (text == "0" || text.empty())
        return MultiIndex{};
    std::vector<Entry> entries;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t next = text.find(';', pos);
        if (next == std::string::npos)
            next = text.size();
        const std::string item = text.substr(pos, next - pos);
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("malformed multi-index entry: " + item);
        const unsigned long j = std::stoul(item.substr(0, colon));
        const unsigned long d = std::stoul(item.substr(colon + 1));
        entries.emplace_back(static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(d));
        pos = next + 1;
    }
    return from_entries(std::move(entries));
}

bool operator<(const MultiIndex& a, const MultiIndex& b) {
    const std::uint64_t oa = a.order(), ob = b.order();
    if (oa != ob)
        return oa < ob;
    const auto& ea = a.entries_;
    const auto& eb = b.entries_;
    const std::size_t nmin = std::min(ea.size(), eb.size());
    for (std::size_t k = 0; k < nmin; ++k) {
        if (ea[k].first != eb[k].first)
            return ea[k].first < eb[k].first;
        if (ea[k].second != eb[k].second)
            return ea[k].second > eb[k].second;
    }
    return false; // equal grade and identical prefix implies equality
}

std::vector<MultiIndex> lower_set(const MultiIndex& cap) {
    std::vector<MultiIndex> out;
    std::vector<MultiIndex::Entry> current;
    const auto& caps = cap.entries();

    auto recurse = [&](auto&& self, std::size_t k) -> void {
        if (k == caps.size()) {
            out.push_back(MultiIndex::from_entries(current));
            return;
        }
        const auto [j, dmax] = caps[k];
        for (std::uint32_t d = 0; d <= dmax; ++d) {
            if (d > 0)
                current.emplace_back(j, d);
            self(self, k + 1);
            if (d > 0)
                current.pop_back();
        }
    };
    recurse(recurse, 0);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<MultiIndex> total_degree_set(std::size_t dims, std::uint32_t total_degree,
                                         std::uint32_t per_coordinate_cap) {
    std::vector<MultiIndex> out;
    std::vector<std::uint32_t> dense(dims, 0);

    auto recurse = [&](auto&& self, std::size_t j, std::uint32_t remaining) -> void {
        if (j == dims) {
            out.push_back(MultiIndex::from_dense(dense));
            return;
        }
        const std::uint32_t top = std::min(remaining, per_coordinate_cap);
        for (std::uint32_t d = 0; d <= top; ++d) {
            dense[j] = d;
            self(self, j + 1, remaining - d);
        }
        dense[j] = 0;
    };
    recurse(recurse, 0, total_degree);
    std::sort(out.begin(), out.end());
    return out;
}

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n)
        return 0;
    k = std::min(k, n - k);
    constexpr unsigned __int128 max128 = ~static_cast<unsigned __int128>(0);
    unsigned __int128 result = 1;
    for (std::uint64_t i = 1; i <= k; ++i) {
        const unsigned __int128 factor = n - k + i;
        if (result > max128 / factor)
            throw std::overflow_error("binomial coefficient exceeds 64 bits");
        result = result * factor / i; // exact: C(m+i, i) = C(m+i-1, i-1) * (m+i) / i
        if (result > std::numeric_limits<std::uint64_t>::max())
            throw std::overflow_error("binomial coefficient exceeds 64 bits");
    }
    return static_cast<std::uint64_t>(result);
}

double multi_binomial(const MultiIndex& nu, const MultiIndex& mu) {
    double prod = 1.0;
    for (const auto& [j, d] : mu.entries()) {
        const std::uint32_t nj = nu.degree(j);
        if (d > nj)
            return 0.0;
        prod *= static_cast<double>(binomial(nj, d));
    }
    return prod;
}

double WeightRule::operator()(std::size_t j) const {
    if (j == 0)
        throw std::invalid_argument("weight sequence indices start at 1");
    switch (kind) {
    case Kind::power:
        return scale * std::pow(static_cast<double>(j), exponent);
    case Kind::dyadic_level: {
        const auto level = static_cast<double>(std::bit_width(j) - 1); // floor(log2 j)
        return scale * std::exp2(exponent * level);
    }
    case Kind::sqrt_log:
        return scale * std::sqrt(2.0 * std::log(static_cast<double>(j) + 1.0));
    case Kind::explicit_list:
        return j <= values.size() ? values[j - 1] : tail;
    }
    throw std::logic_error("unreachable");
}

bool WeightRule::nondecreasing() const {
    switch (kind) {
    case Kind::power:
    case Kind::dyadic_level:
        return exponent >= 0.0;
    case Kind::sqrt_log:
        return true;
    case Kind::explicit_list: {
        for (std::size_t k = 1; k < values.size(); ++k)
            if (values[k] < values[k - 1])
                return false;
        return values.empty() || tail >= values.back();
    }
    }
    return false;
}

void WeightRule::validate() const {
    if (kind == Kind::explicit_list) {
        for (double v : values)
            if (!(v > 0.0))
                throw std::invalid_argument("weight sequence entries must be positive");
        if (!(tail > 0.0))
            throw std::invalid_argument("weight sequence tail must be positive");
    } else if (!(scale > 0.0)) {
        throw std::invalid_argument("weight sequence scale must be positive");
    }
}

WeightRule WeightRule::scaled_by(double t) const {
    if (!(t > 0.0))
        throw std::invalid_argument("scaling factor must be positive");
    WeightRule out = *this;
    if (kind == Kind::explicit_list) {
        for (double& v : out.values)
            v *= t;
        out.tail *= t;
    } else {
        out.scale *= t;
    }
    return out;
}

void WeightSequence::validate() const {
    rho.validate();
    if (r < 1)
        throw std::invalid_argument("derivative order cap r must be >= 1");
}

namespace {

// One factor of b_nu: sum_{l=0}^{r} C(n, l) rho^(2l). Nondecreasing in n.
double weight_factor(std::uint32_t n, double rho, int r) {
    const double rho2 = rho * rho;
    double factor = 1.0; // l = 0 term
    double rho_pow = 1.0;
    for (int l = 1; l <= r; ++l) {
        rho_pow *= rho2;
        if (static_cast<std::uint64_t>(l) > n)
            break; // C(n, l) = 0 from here on
        factor += static_cast<double>(binomial(n, static_cast<std::uint64_t>(l))) * rho_pow;
    }
    return factor;
}

} // namespace

double weight_b(const MultiIndex& nu, const WeightSequence& w) {
    w.validate();
    double b = 1.0;
    for (const auto& [j, d] : nu.entries()) // entries sorted: increasing-j products
        b *= weight_factor(d, w.rho(j), w.r);
    if (!std::isfinite(b))
        throw std::overflow_error("weight b_nu overflows double precision");
    return b;
}

WeightEnumeration enumerate_smallest_weights(std::size_t n, const WeightSequence& w,
                                             std::uint32_t dim_cap) {
    w.validate();
    if (n == 0)
        throw std::invalid_argument("enumeration size must be >= 1");
    if (dim_cap == 0)
        throw std::invalid_argument("dim_cap must be >= 1");

    struct QueueEntry {
        double weight;
        MultiIndex nu;
    };
    // Min-heap on (weight, index order); σ pop order is globally sorted because
    // every factor of b_nu is nondecreasing in the degree.
    auto later = [](const QueueEntry& a, const QueueEntry& b) {
        if (a.weight != b.weight)
            return a.weight > b.weight;
        return b.nu < a.nu;
    };
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, decltype(later)> frontier(later);
    std::unordered_set<MultiIndex, MultiIndexHash> seen;

    frontier.push({1.0, MultiIndex{}});
    seen.insert(MultiIndex{});

    WeightEnumeration result;
    result.items.reserve(n);
    while (result.items.size() < n && !frontier.empty()) {
        QueueEntry top = frontier.top();
        frontier.pop();
        result.items.push_back({top.nu, top.weight});
        for (std::uint32_t j = 1; j <= dim_cap; ++j) {
            MultiIndex next = top.nu.with_increment(j);
            if (seen.insert(next).second)
                frontier.push({weight_b(next, w), std::move(next)});
        }
    }
    result.first_excluded_weight = weight_b(MultiIndex::unit(dim_cap + 1), w);
    return result;
}

namespace {

// sum_{m >= m0} m^(-s) bounded by the first term plus the integral tail; s > 1.
double zeta_tail_bound(double m0, double s) {
    return std::pow(m0, -s) + std::pow(m0, 1.0 - s) / (s - 1.0);
}

} // namespace

TailSumResult weight_tail_sum(const WeightSequence& w, double q, std::uint32_t dim_cap,
                              std::uint32_t degree_cap) {
    w.validate();
    const int r = w.r;
    if (!(q > 2.0 / static_cast<double>(r)))
        throw std::domain_error("weight tail sum diverges unless q > 2/r");
    if (dim_cap == 0)
        throw std::invalid_argument("dim_cap must be >= 1");
    if (degree_cap < static_cast<std::uint32_t>(r))
        throw std::invalid_argument("degree_cap must be at least r");

    const double half_q = q / 2.0;
    const double s = static_cast<double>(r) * half_q; // > 1
    double r_fac = 1.0;
    for (int k = 2; k <= r; ++k)
        r_fac *= k;
    const double r_fac_pow = std::pow(r_fac, half_q);

    double value = 1.0;
    double upper = 1.0;
    for (std::uint32_t j = 1; j <= dim_cap; ++j) {
        const double rho = w.rho(j);
        CompensatedSum partial;
        for (std::uint32_t deg = 0; deg <= degree_cap; ++deg)
            partial.add(std::pow(weight_factor(deg, rho, r), -half_q));
        // Neglected degrees > degree_cap: keep only the l = r term of each factor,
        // bound C(deg, r) >= (deg-r+1)^r / r!, then compare with the zeta tail.
        const double m0 = static_cast<double>(degree_cap) + 2.0 - static_cast<double>(r);
        const double factor_tail =
            std::pow(rho, -static_cast<double>(r) * q) * r_fac_pow * zeta_tail_bound(m0, s);
        value *= partial.value();
        upper *= partial.value() + factor_tail;
    }
    return {value, upper - value};
}

double q_of_p(double p) {
    if (!(p > 0.0) || !(p < 2.0))
        throw std::domain_error("p must lie in (0, 2)");
    return 2.0 * p / (2.0 - p);
}

double stechkin_tail(std::span<const double> sorted_norms, std::size_t n) {
    for (std::size_t k = 1; k < sorted_norms.size(); ++k)
        if (sorted_norms[k] > sorted_norms[k - 1])
            throw std::invalid_argument("norms must be sorted nonincreasing");
    CompensatedSum sum;
    for (std::size_t k = sorted_norms.size(); k > n; --k) {
        const double v = sorted_norms[k - 1];
        sum.add(v * v);
    }
    return std::sqrt(std::max(0.0, sum.value()));
}

double fit_rate(std::span<const std::size_t> ns, std::span<const double> errors) {
    if (ns.size() != errors.size() || ns.size() < 2)
        throw std::invalid_argument("need two or more (n, error) pairs of equal length");
    const std::size_t count = ns.size();
    CompensatedSum sx, sy, sxx, sxy;
    for (std::size_t k = 0; k < count; ++k) {
        if (ns[k] == 0 || !(errors[k] > 0.0))
            throw std::invalid_argument("rate fit requires positive n and error values");
        const double x = std::log(static_cast<double>(ns[k]));
        const double y = std::log(errors[k]);
        sx.add(x);
        sy.add(y);
        sxx.add(x * x);
        sxy.add(x * y);
    }
    const double nd = static_cast<double>(count);
    const double denom = nd * sxx.value() - sx.value() * sx.value();
    if (denom == 0.0)
        throw std::invalid_argument("rate fit requires at least two distinct n values");
    const double slope = (nd * sxy.value() - sx.value() * sy.value()) / denom;
    return -slope;
}

} // namespace lognpce
