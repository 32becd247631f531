#ifndef LOGNPCE_PCE_HPP
#define LOGNPCE_PCE_HPP

#include "lognpce/field.hpp"
#include "lognpce/multiindex.hpp"
#include "lognpce/pde.hpp"

#include <span>
#include <stdexcept>
#include <vector>

namespace lognpce {

/// Raised when a run would exceed the configured resource guards.
class GuardError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when an a-priori index set reaches outside the computed expansion.
class CoverageError : public std::runtime_error {
public:
    CoverageError(std::size_t n, const MultiIndex& nu)
        : std::runtime_error("a-priori set of size " + std::to_string(n) +
                             " needs uncomputed coefficient " + nu.to_string()),
          n_(n), nu_(nu) {}
    std::size_t n() const { return n_; }
    const MultiIndex& nu() const { return nu_; }

private:
    std::size_t n_;
    MultiIndex nu_;
};

struct HermiteCoefficient {
    MultiIndex nu;
    FemSolution u_nu;
    double norm_v; // cached v_norm(u_nu)
};

struct PceExpansion {
    FunctionSystem system = FunctionSystem::schauder();
    std::size_t J = 0;
    int quad_order = 0;
    Mesh1D mesh;
    std::vector<HermiteCoefficient> coefficients; // ascending MultiIndex order
    double mean_square_norm = 0.0; // quadrature estimate of E ||u(y)||_V^2
    std::size_t tensor_nodes = 0;

    const HermiteCoefficient* find(const MultiIndex& nu) const;
    /// sum of ||u_nu||_V^2 over the computed set
    double l2_norm_sq() const;
};

/// Hermite coefficients u_nu for every nu in lambda by full tensor
/// Gauss-Hermite quadrature over the J active dimensions: one FEM solve per
/// tensor node, all coefficients accumulated in the same sweep. lambda must be
/// downward closed, supported on {1..J}, with degrees < quad_order.
/// Guard: quad_order^J <= 1e7 tensor nodes.
PceExpansion compute_expansion(const FunctionSystem& system, std::size_t J,
                               std::span<const MultiIndex> lambda, int quad_order,
                               const Mesh1D& mesh, const ScalarField& f_at,
                               int threads = 0);

struct TruncationError {
    std::size_t n;
    double error; // relative l2 tail over the computed set
};

/// Relative best-n-term truncation errors: coefficients sorted by decreasing
/// norm (ties by index order), tail by compensated summation, normalized by
/// the full l2 norm of the computed set.
std::vector<TruncationError> best_n_term_errors(const PceExpansion& expansion,
                                                std::span<const std::size_t> ns);

struct AprioriError {
    std::size_t n;
    double error;           // relative tail outside the n smallest-weight indices
    double certified_bound; // b_{(n+1)}^{-1/2} (sum b ||u||^2)^{1/2}, same normalization
};

/// Truncation errors for the weight-based a-priori sets: Lambda_n holds the n
/// indices of smallest b_nu. Throws CoverageError if Lambda_n is not contained
/// in the computed expansion.
std::vector<AprioriError> apriori_errors(const PceExpansion& expansion,
                                         const WeightSequence& w,
                                         std::span<const std::size_t> ns);

struct IdentityReport {
    double lhs = 0.0;     // sum_mu rho^{2mu}/mu! integral ||d^mu u||_V^2 dgamma
    double rhs = 0.0;     // sum_nu b_nu ||u_nu||_V^2 over the truncated set
    double rel_gap = 0.0; // |lhs - rhs| / lhs

    struct MuRow {
        MultiIndex mu;
        double contribution; // rho^{2mu}/mu! * quadrature integral
    };
    struct NuRow {
        MultiIndex nu;
        double weight_b;
        double norm_sq;
    };
    std::vector<MuRow> per_mu;
    std::vector<NuRow> per_nu;
};

/// Both sides of the weighted coefficient identity at matched truncation:
/// derivatives of order ||mu||_inf <= w.r integrated by tensor Gauss-Hermite
/// quadrature against the weighted coefficient sum over degrees <= degree_cap.
IdentityReport identity_check(const FunctionSystem& system, std::size_t J,
                              const WeightSequence& w, int quad_order, const Mesh1D& mesh,
                              const ScalarField& f_at, std::uint32_t degree_cap,
                              int threads = 0);

} // namespace lognpce

#endif
