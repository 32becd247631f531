#include "lognpce/field.hpp"

#include "lognpce/summation.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lognpce {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint32_t level_of(std::uint64_t j) {
    return static_cast<std::uint32_t>(std::bit_width(j) - 1);
}

double tri(double x) {
    return std::max(0.0, 0.5 - std::abs(x - 0.5));
}

// sum_{m >= m0} m^(-s) for s > 1
double zeta_tail_bound(double m0, double s) {
    return std::pow(m0, -s) + std::pow(m0, 1.0 - s) / (s - 1.0);
}

} // namespace

double kl_eval(std::size_t j, double x) {
    if (j == 0)
        throw std::invalid_argument("function indices start at 1");
    const double pj = std::numbers::pi * static_cast<double>(j);
    return std::numbers::sqrt2 / pj * std::sin(pj * x);
}

double schauder_eval(std::uint32_t level, std::uint64_t k, double x) {
    if (level >= 63 || k >= (std::uint64_t{1} << level))
        throw std::invalid_argument("Schauder index out of range");
    const double scale = std::exp2(static_cast<double>(level));
    return std::exp2(-0.5 * static_cast<double>(level)) * tri(scale * x - static_cast<double>(k));
}

FunctionSystem::FunctionSystem(Params p) : params_(std::move(p)) {
    switch (params_.kind) {
    case Kind::disjoint_indicator:
        if (params_.power_amplitudes) {
            if (params_.partition != Partition::dyadic)
                throw std::invalid_argument("power amplitudes require the dyadic partition");
            if (!(params_.amplitude_scale > 0.0))
                throw std::invalid_argument("amplitude scale must be positive");
            if (params_.amplitude_decay < 0.0)
                throw std::invalid_argument("amplitude decay must be nonnegative");
        } else {
            if (params_.amplitudes.empty())
                throw std::invalid_argument("indicator system needs at least one amplitude");
            for (double c : params_.amplitudes)
                if (c < 0.0)
                    throw std::invalid_argument("indicator amplitudes must be nonnegative");
        }
        break;
    case Kind::scaled_custom:
        if (!(params_.amplitude_scale > 0.0) || !(params_.alpha > 0.0))
            throw std::invalid_argument("scaled system needs positive amplitude and alpha");
        break;
    case Kind::kl_brownian_bridge:
    case Kind::schauder:
        break;
    }
}

FunctionSystem FunctionSystem::kl_brownian_bridge() {
    Params p;
    p.kind = Kind::kl_brownian_bridge;
    return FunctionSystem(std::move(p));
}

FunctionSystem FunctionSystem::schauder() {
    Params p;
    p.kind = Kind::schauder;
    return FunctionSystem(std::move(p));
}

FunctionSystem FunctionSystem::disjoint_indicator(std::vector<double> amplitudes) {
    Params p;
    p.kind = Kind::disjoint_indicator;
    p.partition = Partition::uniform;
    p.amplitudes = std::move(amplitudes);
    return FunctionSystem(std::move(p));
}

FunctionSystem FunctionSystem::disjoint_indicator_power(double scale, double decay) {
    Params p;
    p.kind = Kind::disjoint_indicator;
    p.partition = Partition::dyadic;
    p.power_amplitudes = true;
    p.amplitude_scale = scale;
    p.amplitude_decay = decay;
    return FunctionSystem(std::move(p));
}

FunctionSystem FunctionSystem::constant_single(double c) {
    return disjoint_indicator({c});
}

FunctionSystem FunctionSystem::scaled_custom(double amplitude, double alpha) {
    Params p;
    p.kind = Kind::scaled_custom;
    p.amplitude_scale = amplitude;
    p.alpha = alpha;
    return FunctionSystem(std::move(p));
}

bool operator==(const FunctionSystem& a, const FunctionSystem& b) {
    const auto& pa = a.params_;
    const auto& pb = b.params_;
    return pa.kind == pb.kind && pa.partition == pb.partition &&
           pa.power_amplitudes == pb.power_amplitudes && pa.amplitudes == pb.amplitudes &&
           pa.amplitude_scale == pb.amplitude_scale &&
           pa.amplitude_decay == pb.amplitude_decay && pa.alpha == pb.alpha;
}

namespace {

double indicator_amplitude(const FunctionSystem::Params& p, std::size_t j) {
    if (p.power_amplitudes)
        return p.amplitude_scale * std::pow(static_cast<double>(j), -p.amplitude_decay);
    return j <= p.amplitudes.size() ? p.amplitudes[j - 1] : 0.0;
}

Interval indicator_cell(const FunctionSystem::Params& p, std::size_t j) {
    if (p.partition == FunctionSystem::Partition::uniform) {
        const auto m = p.power_amplitudes ? std::size_t{0} : p.amplitudes.size();
        if (j > m)
            return {0.0, 0.0};
        const double w = 1.0 / static_cast<double>(m);
        return {static_cast<double>(j - 1) * w, static_cast<double>(j) * w};
    }
    // dyadic: cell j = [2^-j, 2^-(j-1)]
    return {std::exp2(-static_cast<double>(j)), std::exp2(-static_cast<double>(j) + 1.0)};
}

bool indicator_covers(const FunctionSystem::Params& p, std::size_t j, double x) {
    const Interval cell = indicator_cell(p, j);
    if (cell.length() == 0.0)
        return false;
    // half-open cells, closed at the top of the covered range
    if (p.partition == FunctionSystem::Partition::uniform) {
        const auto m = p.amplitudes.size();
        return x >= cell.lo && (x < cell.hi || (j == m && x <= cell.hi));
    }
    return x >= cell.lo && (x < cell.hi || (j == 1 && x <= cell.hi));
}

} // namespace

double FunctionSystem::eval(std::size_t j, double x) const {
    if (j == 0)
        throw std::invalid_argument("function indices start at 1");
    switch (params_.kind) {
    case Kind::kl_brownian_bridge:
        return kl_eval(j, x);
    case Kind::schauder: {
        const std::uint32_t l = level_of(j);
        return schauder_eval(l, j - (std::uint64_t{1} << l), x);
    }
    case Kind::scaled_custom: {
        const std::uint32_t l = level_of(j);
        const std::uint64_t k = j - (std::uint64_t{1} << l);
        const double scale = std::exp2(static_cast<double>(l));
        return params_.amplitude_scale * std::exp2(-params_.alpha * static_cast<double>(l)) *
               2.0 * tri(scale * x - static_cast<double>(k));
    }
    case Kind::disjoint_indicator:
        return indicator_covers(params_, j, x) ? indicator_amplitude(params_, j) : 0.0;
    }
    throw std::logic_error("unreachable");
}

double FunctionSystem::sup_norm(std::size_t j) const {
    if (j == 0)
        throw std::invalid_argument("function indices start at 1");
    switch (params_.kind) {
    case Kind::kl_brownian_bridge:
        return std::numbers::sqrt2 / (std::numbers::pi * static_cast<double>(j));
    case Kind::schauder:
        return 0.5 * std::exp2(-0.5 * static_cast<double>(level_of(j)));
    case Kind::scaled_custom:
        return params_.amplitude_scale *
               std::exp2(-params_.alpha * static_cast<double>(level_of(j)));
    case Kind::disjoint_indicator:
        return indicator_amplitude(params_, j);
    }
    throw std::logic_error("unreachable");
}

Interval FunctionSystem::support(std::size_t j) const {
    if (j == 0)
        throw std::invalid_argument("function indices start at 1");
    switch (params_.kind) {
    case Kind::kl_brownian_bridge:
        return {0.0, 1.0};
    case Kind::schauder:
    case Kind::scaled_custom: {
        const std::uint32_t l = level_of(j);
        const std::uint64_t k = j - (std::uint64_t{1} << l);
        const double w = std::exp2(-static_cast<double>(l));
        return {static_cast<double>(k) * w, static_cast<double>(k + 1) * w};
    }
    case Kind::disjoint_indicator:
        return indicator_cell(params_, j);
    }
    throw std::logic_error("unreachable");
}

double field_eval(const FieldSample& sample, double x) {
    if (sample.system == nullptr)
        throw std::invalid_argument("field sample has no function system");
    CompensatedSum sum;
    for (std::size_t j = 1; j <= sample.y.size(); ++j)
        sum.add(sample.y[j - 1] * sample.system->eval(j, x));
    return sum.value();
}

double field_sup_grid(const FieldSample& sample, std::size_t grid_n) {
    if (grid_n < 2)
        throw std::invalid_argument("grid needs at least two points");
    double sup = 0.0;
    for (std::size_t i = 0; i < grid_n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(grid_n - 1);
        sup = std::max(sup, std::abs(field_eval(sample, x)));
    }
    return sup;
}

namespace {

// --- analytic j > J tail bounds for sup_x sum rho_j |psi_j(x)| ---

struct TailBound {
    double bound;
    bool finite;
};

// Upper bound of rho over the dyadic level l, i.e. j in [2^l, 2^{l+1}).
double rho_level_bound(const WeightRule& rho, std::uint32_t l) {
    using Kind = WeightRule::Kind;
    switch (rho.kind) {
    case Kind::power:
        return rho.scale * std::max(1.0, std::exp2(rho.exponent)) *
               std::exp2(rho.exponent * static_cast<double>(l));
    case Kind::dyadic_level:
        return rho.scale * std::exp2(rho.exponent * static_cast<double>(l));
    case Kind::sqrt_log:
        return rho.scale * std::sqrt(2.0 * std::numbers::ln2 * (static_cast<double>(l) + 1.0));
    case Kind::explicit_list: {
        const std::uint64_t lo = std::uint64_t{1} << l;
        const std::uint64_t hi = (std::uint64_t{1} << (l + 1)) - 1;
        double bound = hi > rho.values.size() ? rho.tail : 0.0;
        for (std::uint64_t j = lo; j <= std::min<std::uint64_t>(hi, rho.values.size()); ++j)
            bound = std::max(bound, rho.values[j - 1]);
        return bound;
    }
    }
    throw std::logic_error("unreachable");
}

// Certified bound on T_{l'+1}/T_{l'} for all l' >= l, with
// T_l = rho_level_bound(l) * 2^{-alpha l}; +inf when no certificate applies yet.
double level_ratio_bound(const WeightRule& rho, std::uint32_t l, double alpha) {
    using Kind = WeightRule::Kind;
    switch (rho.kind) {
    case Kind::power:
    case Kind::dyadic_level:
        return std::exp2(rho.exponent - alpha);
    case Kind::sqrt_log: {
        const double dl = static_cast<double>(l);
        return std::sqrt((dl + 2.0) / (dl + 1.0)) * std::exp2(-alpha);
    }
    case Kind::explicit_list:
        // constant tail once the whole level lies beyond the explicit prefix
        return (std::uint64_t{1} << l) > rho.values.size() ? std::exp2(-alpha) : kInf;
    }
    throw std::logic_error("unreachable");
}

// Hat families (Schauder and scaled): one active function per level, level
// sup-norm amp * 2^{-alpha l}.
TailBound hat_tail(const WeightRule& rho, double amp, double alpha, std::uint32_t l0) {
    CompensatedSum tail;
    const std::uint32_t cap = l0 + 4096;
    for (std::uint32_t l = l0; l < cap; ++l) {
        const double term = amp * std::exp2(-alpha * static_cast<double>(l)) *
                            rho_level_bound(rho, l);
        const double ratio = level_ratio_bound(rho, l, alpha);
        if (ratio < 1.0) {
            tail.add(term / (1.0 - ratio));
            return {tail.value(), true};
        }
        if (rho.kind == WeightRule::Kind::power || rho.kind == WeightRule::Kind::dyadic_level)
            return {kInf, false}; // constant ratio >= 1: the level sums do not decay
        tail.add(term);
    }
    return {kInf, false};
}

TailBound kl_tail(const WeightRule& rho, std::size_t J) {
    using Kind = WeightRule::Kind;
    const double c = std::numbers::sqrt2 / std::numbers::pi;
    switch (rho.kind) {
    case Kind::power: {
        if (rho.exponent >= 0.0)
            return {kInf, false};
        const double s = 1.0 - rho.exponent;
        return {c * rho.scale * zeta_tail_bound(static_cast<double>(J) + 1.0, s), true};
    }
    case Kind::dyadic_level: {
        if (rho.exponent >= 0.0)
            return {kInf, false};
        // per level: sum_{j in level} 1/j <= 1
        const auto l0 = static_cast<double>(level_of(J + 1));
        const double first = c * rho.scale * std::exp2(rho.exponent * l0);
        return {first / (1.0 - std::exp2(rho.exponent)), true};
    }
    case Kind::sqrt_log:
    case Kind::explicit_list:
        return {kInf, false}; // harmonic or worse
    }
    throw std::logic_error("unreachable");
}

// Disjoint supports: the pointwise sum over j > J has at most one term.
TailBound indicator_tail(const FunctionSystem::Params& p, const WeightRule& rho,
                         std::size_t J) {
    using Kind = WeightRule::Kind;
    if (!p.power_amplitudes) {
        double sup = 0.0;
        for (std::size_t j = J + 1; j <= p.amplitudes.size(); ++j)
            sup = std::max(sup, rho(j) * p.amplitudes[j - 1]);
        return {sup, true};
    }
    const double beta = p.amplitude_decay;
    const double as = p.amplitude_scale;
    switch (rho.kind) {
    case Kind::power: {
        const double diff = rho.exponent - beta;
        if (diff > 0.0)
            return {kInf, false};
        if (diff == 0.0)
            return {rho.scale * as, true};
        return {rho.scale * as * std::pow(static_cast<double>(J) + 1.0, diff), true};
    }
    case Kind::dyadic_level: {
        const double diff = rho.exponent - beta;
        if (diff > 0.0)
            return {kInf, false};
        const auto l0 = static_cast<double>(level_of(J + 1));
        return {rho.scale * as * std::exp2(diff * l0), true};
    }
    case Kind::sqrt_log: {
        if (beta <= 0.0)
            return {kInf, false};
        // rho_j c_j decreases once ln(j+1) > 1/(2 beta); scan up to there.
        const double turn = std::exp(1.0 / (2.0 * beta));
        const auto scan_to = static_cast<std::size_t>(
            std::min(1e7, std::max(static_cast<double>(J) + 1.0, std::ceil(turn))));
        double sup = 0.0;
        for (std::size_t j = J + 1; j <= std::max(J + 1, scan_to); ++j)
            sup = std::max(sup, rho(j) * as * std::pow(static_cast<double>(j), -beta));
        return {sup, true};
    }
    case Kind::explicit_list: {
        // scan the listed prefix, then the constant continuation against the
        // nonincreasing amplitudes
        double sup = 0.0;
        for (std::size_t j = J + 1; j <= rho.values.size(); ++j)
            sup = std::max(sup, rho(j) * as * std::pow(static_cast<double>(j), -beta));
        const auto first = std::max(J + 1, rho.values.size() + 1);
        sup = std::max(sup, rho.tail * as * std::pow(static_cast<double>(first), -beta));
        return {sup, true};
    }
    }
    throw std::logic_error("unreachable");
}

} // namespace

SupWeightedSum sup_weighted_sum(const FunctionSystem& system, const WeightSequence& w,
                                std::size_t J, std::size_t grid_n) {
    w.validate();
    if (grid_n < 2)
        throw std::invalid_argument("grid needs at least two points");
    if (J == 0)
        throw std::invalid_argument("J must be >= 1");

    std::vector<double> rho(J);
    for (std::size_t j = 1; j <= J; ++j)
        rho[j - 1] = w.rho(j);

    double grid_value = 0.0;
    for (std::size_t i = 0; i < grid_n; ++i) {
        const double x = static_cast<double>(i) / static_cast<double>(grid_n - 1);
        CompensatedSum sum;
        for (std::size_t j = 1; j <= J; ++j)
            sum.add(rho[j - 1] * std::abs(system.eval(j, x)));
        grid_value = std::max(grid_value, sum.value());
    }

    TailBound tail{kInf, false};
    switch (system.kind()) {
    case FunctionSystem::Kind::kl_brownian_bridge:
        tail = kl_tail(w.rho, J);
        break;
    case FunctionSystem::Kind::schauder:
        tail = hat_tail(w.rho, 0.5, 0.5, level_of(J + 1));
        break;
    case FunctionSystem::Kind::scaled_custom:
        tail = hat_tail(w.rho, system.params().amplitude_scale, system.params().alpha,
                        level_of(J + 1));
        break;
    case FunctionSystem::Kind::disjoint_indicator:
        tail = indicator_tail(system.params(), w.rho, J);
        break;
    }
    return {grid_value, tail.bound, tail.finite};
}

ExpSqSummability check_exp_sq_summability(const WeightRule& rho, std::size_t J) {
    rho.validate();
    if (J == 0)
        throw std::invalid_argument("J must be >= 1");
    using Outcome = ExpSqSummability::Outcome;

    CompensatedSum partial;
    for (std::size_t j = 1; j <= J; ++j) {
        const double r = rho(j);
        partial.add(std::exp(-r * r));
    }

    double tail = kInf;
    Outcome outcome = Outcome::unknown;
    switch (rho.kind) {
    case WeightRule::Kind::power: {
        const double kappa = rho.exponent;
        if (kappa <= 0.0) {
            outcome = Outcome::divergent; // terms bounded below by a constant
            break;
        }
        // sum_{j>J} exp(-c^2 j^{2 kappa}) <= integral, evaluated through the
        // upper incomplete gamma function with a first-order bound.
        const double a = 1.0 / (2.0 * kappa);
        const double x0 = rho.scale * rho.scale * std::pow(static_cast<double>(J), 2.0 * kappa);
        const double prefactor = std::pow(rho.scale, -1.0 / kappa) / (2.0 * kappa);
        if (a <= 1.0) {
            tail = prefactor * std::pow(x0, a - 1.0) * std::exp(-x0);
            outcome = Outcome::satisfied;
        } else if (x0 > a - 1.0) {
            tail = prefactor * std::pow(x0, a - 1.0) * std::exp(-x0) / (1.0 - (a - 1.0) / x0);
            outcome = Outcome::satisfied;
        } else {
            outcome = Outcome::unknown; // truncation J too small to certify
        }
        break;
    }
    case WeightRule::Kind::sqrt_log: {
        const double s = 2.0 * rho.scale * rho.scale; // exp(-rho_j^2) = (j+1)^(-s)
        if (s > 1.0) {
            tail = zeta_tail_bound(static_cast<double>(J) + 2.0, s);
            outcome = Outcome::satisfied;
        } else {
            outcome = Outcome::divergent;
        }
        break;
    }
    case WeightRule::Kind::dyadic_level: {
        const double kappa = rho.exponent;
        if (kappa <= 0.0) {
            outcome = Outcome::divergent;
            break;
        }
        const double c2 = rho.scale * rho.scale;
        const double growth = std::exp2(2.0 * kappa) - 1.0;
        CompensatedSum sum;
        std::uint32_t l = level_of(J + 1);
        for (std::uint32_t iter = 0; iter < 200; ++iter, ++l) {
            const double block = std::exp2(2.0 * kappa * static_cast<double>(l));
            const double term = std::exp2(static_cast<double>(l)) * std::exp(-c2 * block);
            const double ratio = 2.0 * std::exp(-c2 * block * growth);
            if (ratio < 0.5) {
                sum.add(term / (1.0 - ratio));
                tail = sum.value();
                outcome = Outcome::satisfied;
                break;
            }
            sum.add(term);
        }
        break;
    }
    case WeightRule::Kind::explicit_list:
        outcome = Outcome::divergent; // constant positive continuation
        break;
    }

    if (outcome != Outcome::satisfied)
        tail = kInf;
    return {partial.value(), tail, outcome};
}

} // namespace lognpce
