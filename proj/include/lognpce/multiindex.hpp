#ifndef LOGNPCE_MULTIINDEX_HPP
#define LOGNPCE_MULTIINDEX_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace lognpce {

/// Finitely supported sequence of nonnegative integers (Hermite degree per
/// coordinate). Stored sparsely as (coordinate, degree) pairs with
/// coordinate >= 1 and degree >= 1; absent coordinates have degree 0.
class MultiIndex {
public:
    using Entry = std::pair<std::uint32_t, std::uint32_t>; // (j, degree)

    MultiIndex() = default;

    /// degree * e_j
    static MultiIndex unit(std::uint32_t j, std::uint32_t degree = 1);
    /// From (j, degree) pairs; zero degrees are dropped, entries are sorted.
    static MultiIndex from_entries(std::vector<Entry> entries);
    /// From a dense degree vector for coordinates 1..degrees.size().
    static MultiIndex from_dense(std::span<const std::uint32_t> degrees);

    std::uint32_t degree(std::uint32_t j) const;
    std::uint64_t order() const;          // |nu| = sum of degrees
    std::uint32_t max_degree() const;     // ||nu||_inf
    std::uint32_t max_coordinate() const; // largest j in the support, 0 if empty
    bool empty() const { return entries_.empty(); }
    std::size_t support_size() const { return entries_.size(); }
    const std::vector<Entry>& entries() const { return entries_; }

    /// nu + delta * e_j; delta may be negative but must not push degree below 0.
    MultiIndex with_increment(std::uint32_t j, std::int64_t delta = 1) const;

    /// Componentwise nu <= other.
    bool leq(const MultiIndex& other) const;

    /// nu! as a double (exact for the degree range permitted elsewhere).
    double factorial_as_double() const;

    std::size_t hash() const;

    /// "0" for the empty index, otherwise "j:d" pairs joined by ';'.
    std::string to_string() const;
    static MultiIndex parse(const std::string& text);

    friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
        return a.entries_ == b.entries_;
    }
    friend bool operator!=(const MultiIndex& a, const MultiIndex& b) { return !(a == b); }

    /// Graded order: smaller |nu| first; within a grade, lexicographic with
    /// mass at earlier coordinates ranking first (2e1 < e1+e2 < 2e2).
    friend bool operator<(const MultiIndex& a, const MultiIndex& b);

private:
    std::vector<Entry> entries_; // sorted by coordinate, degrees > 0
};

struct MultiIndexHash {
    std::size_t operator()(const MultiIndex& nu) const { return nu.hash(); }
};

/// All mu <= cap (componentwise), sorted ascending in the MultiIndex order.
std::vector<MultiIndex> lower_set(const MultiIndex& cap);

/// All nu with |nu| <= total_degree, degree_j <= per_coordinate_cap, and
/// support in {1..dims}; sorted ascending. Downward closed by construction.
std::vector<MultiIndex> total_degree_set(std::size_t dims, std::uint32_t total_degree,
                                         std::uint32_t per_coordinate_cap);

/// Product of per-coordinate binomials C(nu_j, mu_j); zero when mu !<= nu.
double multi_binomial(const MultiIndex& nu, const MultiIndex& mu);

/// Exact binomial coefficient with the convention C(n,k) = 0 for k > n.
/// Throws std::overflow_error if the value does not fit in 64 bits.
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Rule generating a positive sequence rho_1, rho_2, ...
struct WeightRule {
    enum class Kind {
        power,         // rho_j = scale * j^exponent
        dyadic_level,  // rho_j = scale * 2^(exponent * floor(log2 j))
        sqrt_log,      // rho_j = scale * sqrt(2 ln(j+1))
        explicit_list, // values[j-1] for j <= values.size(), then tail
    };

    Kind kind = Kind::power;
    double scale = 1.0;
    double exponent = 0.0;
    std::vector<double> values;
    double tail = 1.0;

    double operator()(std::size_t j) const;
    bool nondecreasing() const;
    void validate() const; // throws std::invalid_argument on nonpositive entries

    static WeightRule power(double scale, double exponent) {
        return WeightRule{Kind::power, scale, exponent, {}, 1.0};
    }
    static WeightRule dyadic_level(double scale, double exponent) {
        return WeightRule{Kind::dyadic_level, scale, exponent, {}, 1.0};
    }
    static WeightRule sqrt_log(double scale) {
        return WeightRule{Kind::sqrt_log, scale, 0.0, {}, 1.0};
    }
    static WeightRule explicit_list(std::vector<double> values, double tail) {
        return WeightRule{Kind::explicit_list, 1.0, 0.0, std::move(values), tail};
    }

    /// Uniformly rescaled rule (every rho_j multiplied by t > 0).
    WeightRule scaled_by(double t) const;

    friend bool operator==(const WeightRule&, const WeightRule&) = default;
};

/// Positive sequence (rho_j) together with the derivative-order cap r >= 1.
struct WeightSequence {
    WeightRule rho;
    int r = 1;

    void validate() const;
};

/// b_nu = prod_j sum_{l=0}^{r} C(nu_j, l) rho_j^{2l}. Always >= 1.
double weight_b(const MultiIndex& nu, const WeightSequence& w);

struct WeightedIndex {
    MultiIndex nu;
    double weight;
};

struct WeightEnumeration {
    std::vector<WeightedIndex> items;   // nondecreasing weight, ties by index order
    double first_excluded_weight;       // b at e_{dim_cap+1}, truncation diagnostic
};

/// The n multi-indices with support in {1..dim_cap} of smallest weight b_nu,
/// by best-first search over the monotone lattice. The result is downward closed.
WeightEnumeration enumerate_smallest_weights(std::size_t n, const WeightSequence& w,
                                             std::uint32_t dim_cap);

struct TailSumResult {
    double value;           // truncated factorized sum
    double neglected_bound; // certified bound on the degree-truncation error
    double upper() const { return value + neglected_bound; }
};

/// Truncated evaluation of sum_nu b_nu^{-q/2} over support {1..dim_cap} as a
/// product of per-coordinate series, each cut at degree_cap, with a certified
/// bound on the neglected part. Requires q > 2/r (the series diverges otherwise).
TailSumResult weight_tail_sum(const WeightSequence& w, double q, std::uint32_t dim_cap,
                              std::uint32_t degree_cap);

/// q = 2p/(2-p) for p in (0,2).
double q_of_p(double p);

/// l2 norm of the entries beyond the first n of a nonincreasing list,
/// accumulated from the smallest entries with compensated summation.
double stechkin_tail(std::span<const double> sorted_norms, std::size_t n);

/// Least-squares slope of log(error) against log(n), negated, so that a clean
/// n^{-s} decay returns s.
double fit_rate(std::span<const std::size_t> ns, std::span<const double> errors);

} // namespace lognpce

#endif
