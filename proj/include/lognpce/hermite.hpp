#ifndef LOGNPCE_HERMITE_HPP
#define LOGNPCE_HERMITE_HPP

#include "lognpce/multiindex.hpp"

#include <span>
#include <vector>

namespace lognpce {

/// Degrees above this make the sqrt(k!) normalization factors unreliable;
/// desk-scale expansions stay far below it.
inline constexpr int kMaxHermiteDegree = 64;

/// Quadrature rule for integrals against the standard Gaussian density.
struct QuadratureRule1D {
    std::vector<double> nodes;   // symmetric about 0, ascending
    std::vector<double> weights; // positive, sum to 1
    int order = 0;
};

/// Value of the Hermite polynomial of the given degree, orthonormal with
/// respect to the standard Gaussian weight. Three-term recurrence
/// H_{k+1}(t) = (t H_k(t) - sqrt(k) H_{k-1}(t)) / sqrt(k+1).
double hermite_eval(int degree, double t);

/// Values H_0(t) .. H_max(t) in one recurrence sweep.
void hermite_eval_all(int max_degree, double t, std::span<double> out);

/// Gauss quadrature for the standard Gaussian weight, exact for polynomials
/// of degree <= 2*order - 1. Nodes and weights from the symmetric
/// tridiagonal eigenproblem of the monic recurrence (off-diagonals sqrt(k)).
QuadratureRule1D gauss_hermite(int order);

/// prod_{j in supp(nu)} H_{nu_j}(y_j) with y[j-1] holding coordinate j.
/// Throws if the support reaches past the provided coordinates.
double tensor_hermite_eval(const MultiIndex& nu, std::span<const double> y);

} // namespace lognpce

#endif
