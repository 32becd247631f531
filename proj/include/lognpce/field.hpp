#ifndef LOGNPCE_FIELD_HPP
#define LOGNPCE_FIELD_HPP

#include "lognpce/multiindex.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace lognpce {

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
    bool contains(double x) const { return x >= lo && x <= hi; }
    double length() const { return hi - lo; }
};

/// Karhunen-Loeve function of the Brownian bridge: (sqrt(2)/(pi j)) sin(pi j x).
double kl_eval(std::size_t j, double x);

/// Schauder hat 2^{-l/2} psi(2^l x - k) with psi(x) = max{0, 1/2 - |x - 1/2|};
/// linear index j = 2^l + k. Throws on k outside [0, 2^l).
double schauder_eval(std::uint32_t level, std::uint64_t k, double x);

/// Enumerable family (psi_j) on [0,1] with closed-form sup-norms and supports.
class FunctionSystem {
public:
    enum class Kind { kl_brownian_bridge, schauder, disjoint_indicator, scaled_custom };
    enum class Partition { uniform, dyadic };

    struct Params {
        Kind kind = Kind::schauder;
        // disjoint_indicator
        Partition partition = Partition::uniform;
        bool power_amplitudes = false;
        std::vector<double> amplitudes; // explicit c_j, zero beyond the list
        double amplitude_scale = 1.0;   // c_j = amplitude_scale * j^{-amplitude_decay}
        double amplitude_decay = 0.0;
        // scaled_custom: hats with sup-norm amplitude_scale * 2^{-alpha l}
        double alpha = 0.5;
    };

    explicit FunctionSystem(Params p);

    static FunctionSystem kl_brownian_bridge();
    static FunctionSystem schauder();
    /// Indicators of the uniform partition of (0,1) into amplitudes.size() cells.
    static FunctionSystem disjoint_indicator(std::vector<double> amplitudes);
    /// Indicators of the dyadic partition (2^-j, 2^-{j-1}] with c_j = scale * j^-decay.
    static FunctionSystem disjoint_indicator_power(double scale, double decay);
    /// Single function psi_1 == c on (0,1), all others zero.
    static FunctionSystem constant_single(double c);
    /// Hat family on dyadic cells with sup-norm amplitude * 2^{-alpha l}.
    static FunctionSystem scaled_custom(double amplitude, double alpha);

    double eval(std::size_t j, double x) const;
    double sup_norm(std::size_t j) const;
    Interval support(std::size_t j) const;
    Kind kind() const { return params_.kind; }
    const Params& params() const { return params_; }

    friend bool operator==(const FunctionSystem& a, const FunctionSystem& b);

private:
    Params params_;
};

/// Truncated field b_J(y) = sum_{j<=J} y_j psi_j; J = y.size().
struct FieldSample {
    const FunctionSystem* system = nullptr;
    std::vector<double> y;

    std::size_t dims() const { return y.size(); }
};

/// b_J(y)(x), summed in increasing j with compensated summation.
double field_eval(const FieldSample& sample, double x);

/// max |b_J(y)(x)| over a uniform grid of grid_n points including endpoints.
double field_sup_grid(const FieldSample& sample, std::size_t grid_n);

struct SupWeightedSum {
    double grid_value;  // max over the grid of sum_{j<=J} rho_j |psi_j(x)|
    double tail_bound;  // certified bound on sup_x sum_{j>J}; meaningful iff tail_finite
    bool tail_finite;
};

/// Grid evaluation of the weighted pointwise sum plus, when the combination of
/// system and rule admits one, an analytic bound for the neglected j > J part.
SupWeightedSum sup_weighted_sum(const FunctionSystem& system, const WeightSequence& w,
                                std::size_t J, std::size_t grid_n = 4097);

struct ExpSqSummability {
    enum class Outcome { satisfied, divergent, unknown };
    double partial_sum; // sum_{j<=J} exp(-rho_j^2)
    double tail_bound;  // certified bound for j > J when outcome == satisfied
    Outcome outcome;
    bool satisfied() const { return outcome == Outcome::satisfied; }
};

/// Convergence check for sum_j exp(-rho_j^2): partial sum up to J plus a
/// certified tail bound where the rule allows one. Never passes silently:
/// inconclusive truncations report Outcome::unknown.
ExpSqSummability check_exp_sq_summability(const WeightRule& rho, std::size_t J);

} // namespace lognpce

#endif
