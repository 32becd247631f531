#ifndef LOGNPCE_STATS_HPP
#define LOGNPCE_STATS_HPP

#include "lognpce/field.hpp"
#include "lognpce/pde.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace lognpce {

/// Monte Carlo run description. Identical configs produce bitwise-identical
/// results, and serial and parallel runs agree (fixed chunking, fixed-order
/// merges, counter-based variates).
struct SampleConfig {
    std::uint64_t seed = 0;
    std::size_t N = 1000;
    std::size_t J = 1;
    FunctionSystem system = FunctionSystem::schauder();
    Mesh1D mesh{255};
    ScalarField f_at = [](double) { return 1.0; };
    std::size_t sup_grid = 2049; // grid for the ||b||_inf surrogate
    int threads = 0;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    bool overflow = false; // some sample overflowed exp(); value is meaningless
};

/// Monte Carlo estimate of E[exp(k ||b_J(y)||_inf)] with the grid sup-norm.
Estimate mc_exp_moment_b(const SampleConfig& cfg, double k);

struct MomentRun {
    Estimate estimate;                      // E[||u(y)||_V^k]
    std::size_t laxmilgram_violations = 0;  // samples breaking the a-priori bound
};

/// Monte Carlo estimate of E[||u(y)||_V^k]; one FEM solve per sample. Each
/// sample is also checked against ||u||_V <= ||f||_{V*} exp(||b||_inf) with
/// the element-midpoint sup-norm surrogate.
MomentRun mc_moment_u(const SampleConfig& cfg, double k);

struct TailPoint {
    double t;
    double p;          // empirical P(||b||_inf > t)
    double std_error;  // sqrt(p(1-p)/N)
    std::size_t count; // exceedances observed
    bool low_count;    // fewer than 10 observations behind the estimate
};

/// Empirical survival curve of ||b_J(y)||_inf at the requested thresholds.
std::vector<TailPoint> tail_curve(const SampleConfig& cfg, std::span<const double> ts);

struct TailFit {
    double slope;     // of log P against t^2; Gaussian-type decay gives slope < 0
    double intercept;
    std::size_t points_used;
};

/// Least-squares fit of log P(t) against t^2 over the points with nonzero
/// counts. Throws if fewer than two usable points remain.
TailFit fit_tail_curve(std::span<const TailPoint> points);

/// Gaussian coordinates of one sample: y_j = gaussian_variate(seed, index, j).
std::vector<double> draw_sample(std::uint64_t seed, std::uint64_t index, std::size_t J);

} // namespace lognpce

#endif
