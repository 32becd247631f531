#ifndef LOGNPCE_PDE_HPP
#define LOGNPCE_PDE_HPP

#include "lognpce/field.hpp"
#include "lognpce/multiindex.hpp"

#include <functional>
#include <map>
#include <span>
#include <vector>

namespace lognpce {

/// Uniform mesh of (0,1) with m interior nodes, h = 1/(m+1).
struct Mesh1D {
    int m = 1;

    double h() const { return 1.0 / static_cast<double>(m + 1); }
    double node(int i) const { return static_cast<double>(i) * h(); } // i = 1..m
    int elements() const { return m + 1; }
    double midpoint(int e) const { return (static_cast<double>(e) + 0.5) * h(); } // e = 0..m

    friend bool operator==(const Mesh1D&, const Mesh1D&) = default;
};

/// Continuous piecewise-linear function on the mesh vanishing at 0 and 1,
/// stored by its interior nodal values.
struct FemSolution {
    Mesh1D mesh;
    std::vector<double> coeffs; // size mesh.m
};

using ScalarField = std::function<double(double)>;

/// Thomas factorization of the symmetric tridiagonal stiffness matrix.
class TridiagonalFactor {
public:
    /// Builds and factors the P1 stiffness matrix for per-element coefficient
    /// values a_mid (size m+1, all positive).
    TridiagonalFactor(std::span<const double> a_mid, const Mesh1D& mesh);

    void solve(std::span<const double> rhs, std::span<double> out) const;
    std::vector<double> solve(std::span<const double> rhs) const;
    const Mesh1D& mesh() const { return mesh_; }

private:
    Mesh1D mesh_;
    std::vector<double> diag_;  // pivots after elimination
    std::vector<double> lower_; // multipliers
    std::vector<double> upper_; // original superdiagonal
};

/// Coefficient values at element midpoints; throws on nonpositive values.
std::vector<double> coefficient_at_midpoints(const ScalarField& a_at, const Mesh1D& mesh);

/// Load vector with the per-element midpoint rule.
std::vector<double> load_vector(const ScalarField& f_at, const Mesh1D& mesh);

/// Galerkin P1 solution of -(a u')' = f with homogeneous Dirichlet data.
FemSolution assemble_solve(const ScalarField& a_at, const ScalarField& f_at,
                           const Mesh1D& mesh);
/// Same from precomputed midpoint coefficient values and load vector.
FemSolution assemble_solve(std::span<const double> a_mid, std::span<const double> load,
                           const Mesh1D& mesh);

/// ||u'||_{L2}, exact for the piecewise-constant derivative.
double v_norm(const FemSolution& u);

/// (integral a |u'|^2)^{1/2} with midpoint evaluation of a.
double a_norm(const FemSolution& u, const ScalarField& a_at);
double a_norm(const FemSolution& u, std::span<const double> a_mid);

/// Residual max-norm of the assembled system relative to the load, for the
/// Galerkin-orthogonality diagnostics.
double relative_residual(const FemSolution& u, std::span<const double> a_mid,
                         std::span<const double> load);

/// psi_j evaluated at element midpoints for j = 1..J, cached for reuse across
/// samples; row j-1 holds the m+1 midpoint values of psi_j.
class FieldMidpointTable {
public:
    FieldMidpointTable(const FunctionSystem& system, std::size_t J, const Mesh1D& mesh);

    const Mesh1D& mesh() const { return mesh_; }
    std::size_t dims() const { return J_; }
    std::span<const double> row(std::size_t j) const; // j = 1..J

    /// b_J(y) at all midpoints.
    void field_at_midpoints(std::span<const double> y, std::span<double> out) const;
    /// exp(b_J(y)) at all midpoints.
    void coefficient_at_midpoints(std::span<const double> y, std::span<double> out) const;
    /// max over midpoints and nodes of |b_J(y)|, the sup-norm surrogate used by
    /// the per-sample bounds.
    double field_sup(std::span<const double> y) const;

private:
    Mesh1D mesh_;
    std::size_t J_;
    std::vector<double> mid_values_;  // J rows of m+1
    std::vector<double> node_values_; // J rows of m
};

/// All partial derivatives of the solution map at a fixed sample, in the
/// MultiIndex order; key 0 is the solution itself. Each derivative solves the
/// recursion with the stiffness factored once per sample.
std::map<MultiIndex, FemSolution> derivative_recursion(const FieldSample& sample,
                                                       const MultiIndex& mu_cap,
                                                       const Mesh1D& mesh,
                                                       const ScalarField& f_at);

/// Reusable engine behind derivative_recursion: binds the system, mesh and
/// load once, then solves per sample.
class DerivativeSolver {
public:
    DerivativeSolver(const FunctionSystem& system, std::size_t J, const Mesh1D& mesh,
                     const ScalarField& f_at, const MultiIndex& mu_cap);

    const std::vector<MultiIndex>& derivative_set() const { return mu_set_; }
    const FieldMidpointTable& table() const { return table_; }

    /// Solutions in the order of derivative_set(); out[k].coeffs sized m.
    void solve_all(std::span<const double> y, std::vector<FemSolution>& out) const;
    std::map<MultiIndex, FemSolution> solve_map(std::span<const double> y) const;

private:
    FieldMidpointTable table_;
    Mesh1D mesh_;
    std::vector<double> load_;
    MultiIndex mu_cap_;
    std::vector<MultiIndex> mu_set_; // lower set of mu_cap, ascending
    // per mu: list of (index of nu in mu_set_, C(mu,nu), index into psi_pow_)
    struct Term {
        std::size_t nu_pos;
        double coeff;
        std::size_t pow_pos;
    };
    std::vector<std::vector<Term>> terms_;
    std::vector<double> psi_pow_; // packed element vectors of psi^{mu-nu}
};

struct StabilityGap {
    double lhs; // ||u - u~||_V
    double rhs; // ||f||_{V*} ||a - a~||_inf / min{a_min, a~_min}^2
};

/// Both sides of the perturbation estimate for two coefficient fields; the
/// sup-norm and minima are taken over the element midpoints.
StabilityGap stability_gap(const ScalarField& a1, const ScalarField& a2,
                           const ScalarField& f_at, const Mesh1D& mesh);

struct DerivativeBoundCheck {
    double lhs; // sum over mu of rho^{2 mu}/mu! * a-norm(d^mu u)^2
    double rhs; // a-norm(u)^2 / (1 - K/C_r)
    bool holds() const { return lhs <= rhs; }
};

/// Weighted sum of all derivatives of order ||mu||_inf <= w.r against the
/// geometric bound. K must be the (certified) value of sup_x sum rho_j |psi_j|
/// and must stay below ln(2)/sqrt(r).
DerivativeBoundCheck pointwise_derivative_bound_check(const FieldSample& sample,
                                                      const WeightSequence& w, double K,
                                                      const Mesh1D& mesh,
                                                      const ScalarField& f_at);
/// Variant reusing a prebuilt solver whose cap is degree w.r on every coordinate.
DerivativeBoundCheck pointwise_derivative_bound_check(const DerivativeSolver& solver,
                                                      std::span<const double> y,
                                                      const WeightSequence& w, double K);

/// Multi-index with degree `degree` on every coordinate 1..J.
MultiIndex uniform_cap(std::size_t J, std::uint32_t degree);

/// ||f||_{V*} at mesh resolution: v_norm of the solution with a == 1.
double dual_norm_estimate(const ScalarField& f_at, const Mesh1D& mesh);

} // namespace lognpce

#endif
