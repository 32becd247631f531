#include "lognpce/pde.hpp"

#include "lognpce/summation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace lognpce {

TridiagonalFactor::TridiagonalFactor(std::span<const double> a_mid, const Mesh1D& mesh)
    : mesh_(mesh) {
    const int m = mesh.m;
    if (m < 1)
        throw std::invalid_argument("mesh needs at least one interior node");
    if (a_mid.size() != static_cast<std::size_t>(m + 1))
        throw std::invalid_argument("coefficient vector must have one value per element");
    const double h = mesh.h();
    diag_.resize(m);
    upper_.resize(m > 1 ? m - 1 : 0);
    lower_.resize(m > 1 ? m - 1 : 0);
    for (int p = 0; p < m; ++p)
        diag_[p] = (a_mid[p] + a_mid[p + 1]) / h;
    for (int p = 0; p + 1 < m; ++p)
        upper_[p] = -a_mid[p + 1] / h;
    // Thomas elimination; no pivoting needed for this M-matrix.
    for (int p = 1; p < m; ++p) {
        lower_[p - 1] = upper_[p - 1] / diag_[p - 1];
        diag_[p] -= lower_[p - 1] * upper_[p - 1];
        if (!(diag_[p] > 0.0))
            throw std::runtime_error("stiffness factorization broke down");
    }
}

void TridiagonalFactor::solve(std::span<const double> rhs, std::span<double> out) const {
    const int m = mesh_.m;
    if (rhs.size() != static_cast<std::size_t>(m) || out.size() != static_cast<std::size_t>(m))
        throw std::invalid_argument("right-hand side size mismatch");
    out[0] = rhs[0];
    for (int p = 1; p < m; ++p)
        out[p] = rhs[p] - lower_[p - 1] * out[p - 1];
    out[m - 1] /= diag_[m - 1];
    for (int p = m - 2; p >= 0; --p)
        out[p] = (out[p] - upper_[p] * out[p + 1]) / diag_[p];
}

std::vector<double> TridiagonalFactor::solve(std::span<const double> rhs) const {
    std::vector<double> out(rhs.size());
    solve(rhs, out);
    return out;
}

std::vector<double> coefficient_at_midpoints(const ScalarField& a_at, const Mesh1D& mesh) {
    std::vector<double> a_mid(mesh.elements());
    for (int e = 0; e < mesh.elements(); ++e) {
        a_mid[e] = a_at(mesh.midpoint(e));
        if (!(a_mid[e] > 0.0))
            throw std::domain_error("diffusion coefficient must be positive");
    }
    return a_mid;
}

std::vector<double> load_vector(const ScalarField& f_at, const Mesh1D& mesh) {
    const double h = mesh.h();
    std::vector<double> f_mid(mesh.elements());
    for (int e = 0; e < mesh.elements(); ++e)
        f_mid[e] = f_at(mesh.midpoint(e));
    std::vector<double> load(mesh.m);
    for (int p = 0; p < mesh.m; ++p)
        load[p] = 0.5 * h * (f_mid[p] + f_mid[p + 1]);
    return load;
}

FemSolution assemble_solve(const ScalarField& a_at, const ScalarField& f_at,
                           const Mesh1D& mesh) {
    const auto a_mid = coefficient_at_midpoints(a_at, mesh);
    const auto load = load_vector(f_at, mesh);
    return assemble_solve(a_mid, load, mesh);
}

FemSolution assemble_solve(std::span<const double> a_mid, std::span<const double> load,
                           const Mesh1D& mesh) {
    TridiagonalFactor factor(a_mid, mesh);
    FemSolution u{mesh, {}};
    u.coeffs.resize(mesh.m);
    factor.solve(load, u.coeffs);
    return u;
}

namespace {

// sum over elements of weight_e * (jump_e)^2 / h
double weighted_gradient_sq(const FemSolution& u, std::span<const double> weight) {
    const double h = u.mesh.h();
    CompensatedSum sum;
    double prev = 0.0;
    for (int p = 0; p < u.mesh.m; ++p) {
        const double d = u.coeffs[p] - prev;
        sum.add((weight.empty() ? 1.0 : weight[p]) * d * d);
        prev = u.coeffs[p];
    }
    sum.add((weight.empty() ? 1.0 : weight[u.mesh.m]) * prev * prev);
    return sum.value() / h;
}

} // namespace

double v_norm(const FemSolution& u) {
    return std::sqrt(weighted_gradient_sq(u, {}));
}

double a_norm(const FemSolution& u, std::span<const double> a_mid) {
    if (a_mid.size() != static_cast<std::size_t>(u.mesh.elements()))
        throw std::invalid_argument("coefficient vector must have one value per element");
    return std::sqrt(weighted_gradient_sq(u, a_mid));
}

double a_norm(const FemSolution& u, const ScalarField& a_at) {
    return a_norm(u, coefficient_at_midpoints(a_at, u.mesh));
}

double relative_residual(const FemSolution& u, std::span<const double> a_mid,
                         std::span<const double> load) {
    const int m = u.mesh.m;
    const double h = u.mesh.h();
    double res = 0.0, ref = 0.0;
    for (int p = 0; p < m; ++p) {
        const double left = p > 0 ? u.coeffs[p - 1] : 0.0;
        const double right = p + 1 < m ? u.coeffs[p + 1] : 0.0;
        const double flux_left = a_mid[p] * (u.coeffs[p] - left) / h;
        const double flux_right = a_mid[p + 1] * (right - u.coeffs[p]) / h;
        res = std::max(res, std::abs(flux_left - flux_right - load[p]));
        ref = std::max(ref, std::abs(flux_left) + std::abs(flux_right) + std::abs(load[p]));
    }
    return ref > 0.0 ? res / ref : res;
}

FieldMidpointTable::FieldMidpointTable(const FunctionSystem& system, std::size_t J,
                                       const Mesh1D& mesh)
    : mesh_(mesh), J_(J) {
    if (J == 0)
        throw std::invalid_argument("J must be >= 1");
    const int ne = mesh.elements();
    mid_values_.resize(J * static_cast<std::size_t>(ne));
    node_values_.resize(J * static_cast<std::size_t>(mesh.m));
    for (std::size_t j = 1; j <= J; ++j) {
        double* mid = mid_values_.data() + (j - 1) * static_cast<std::size_t>(ne);
        for (int e = 0; e < ne; ++e)
            mid[e] = system.eval(j, mesh.midpoint(e));
        double* node = node_values_.data() + (j - 1) * static_cast<std::size_t>(mesh.m);
        for (int i = 1; i <= mesh.m; ++i)
            node[i - 1] = system.eval(j, mesh.node(i));
    }
}

std::span<const double> FieldMidpointTable::row(std::size_t j) const {
    if (j == 0 || j > J_)
        throw std::invalid_argument("row index out of range");
    const auto ne = static_cast<std::size_t>(mesh_.elements());
    return {mid_values_.data() + (j - 1) * ne, ne};
}

void FieldMidpointTable::field_at_midpoints(std::span<const double> y,
                                            std::span<double> out) const {
    const auto ne = static_cast<std::size_t>(mesh_.elements());
    if (y.size() != J_ || out.size() != ne)
        throw std::invalid_argument("size mismatch in field evaluation");
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t j = 0; j < J_; ++j) {
        const double* mid = mid_values_.data() + j * ne;
        const double yj = y[j];
        for (std::size_t e = 0; e < ne; ++e)
            out[e] += yj * mid[e];
    }
}

void FieldMidpointTable::coefficient_at_midpoints(std::span<const double> y,
                                                  std::span<double> out) const {
    field_at_midpoints(y, out);
    for (double& v : out)
        v = std::exp(v);
}

double FieldMidpointTable::field_sup(std::span<const double> y) const {
    const auto ne = static_cast<std::size_t>(mesh_.elements());
    const auto nn = static_cast<std::size_t>(mesh_.m);
    if (y.size() != J_)
        throw std::invalid_argument("size mismatch in field evaluation");
    double sup = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
        double b = 0.0;
        for (std::size_t j = 0; j < J_; ++j)
            b += y[j] * mid_values_[j * ne + e];
        sup = std::max(sup, std::abs(b));
    }
    for (std::size_t i = 0; i < nn; ++i) {
        double b = 0.0;
        for (std::size_t j = 0; j < J_; ++j)
            b += y[j] * node_values_[j * nn + i];
        sup = std::max(sup, std::abs(b));
    }
    return sup;
}

DerivativeSolver::DerivativeSolver(const FunctionSystem& system, std::size_t J,
                                   const Mesh1D& mesh, const ScalarField& f_at,
                                   const MultiIndex& mu_cap)
    : table_(system, J, mesh), mesh_(mesh), load_(load_vector(f_at, mesh)), mu_cap_(mu_cap) {
    if (mu_cap.max_coordinate() > J)
        throw std::invalid_argument("mu_cap must be supported on {1..J}");

    mu_set_ = lower_set(mu_cap);
    std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> position;
    position.reserve(mu_set_.size());
    for (std::size_t k = 0; k < mu_set_.size(); ++k)
        position.emplace(mu_set_[k], k);

    const auto ne = static_cast<std::size_t>(mesh.elements());
    std::unordered_map<MultiIndex, std::size_t, MultiIndexHash> pow_position;
    auto pow_index = [&](const MultiIndex& tau) {
        auto [it, inserted] = pow_position.emplace(tau, pow_position.size());
        if (inserted) {
            const std::size_t base = psi_pow_.size();
            psi_pow_.resize(base + ne, 1.0);
            for (const auto& [j, d] : tau.entries()) {
                const auto row = table_.row(j);
                for (std::size_t e = 0; e < ne; ++e) {
                    double p = 1.0;
                    for (std::uint32_t t = 0; t < d; ++t)
                        p *= row[e];
                    psi_pow_[base + e] *= p;
                }
            }
        }
        return it->second;
    };

    terms_.resize(mu_set_.size());
    for (std::size_t mi = 1; mi < mu_set_.size(); ++mi) {
        const MultiIndex& mu = mu_set_[mi];
        for (const MultiIndex& nu : lower_set(mu)) {
            if (nu == mu)
                continue;
            MultiIndex tau = mu;
            for (const auto& [j, d] : nu.entries())
                tau = tau.with_increment(j, -static_cast<std::int64_t>(d));
            terms_[mi].push_back(Term{position.at(nu), multi_binomial(mu, nu), pow_index(tau)});
        }
    }
}

void DerivativeSolver::solve_all(std::span<const double> y,
                                 std::vector<FemSolution>& out) const {
    if (y.size() != table_.dims())
        throw std::invalid_argument("sample dimension mismatch");
    const int m = mesh_.m;
    const auto ne = static_cast<std::size_t>(mesh_.elements());
    const double h = mesh_.h();

    std::vector<double> a_mid(ne);
    table_.coefficient_at_midpoints(y, a_mid);
    TridiagonalFactor factor(a_mid, mesh_);

    out.resize(mu_set_.size());
    std::vector<double> grads(mu_set_.size() * ne);
    std::vector<double> q(ne), rhs(m);

    auto fill_gradient = [&](std::size_t k) {
        const auto& coeffs = out[k].coeffs;
        double* g = grads.data() + k * ne;
        double prev = 0.0;
        for (int p = 0; p < m; ++p) {
            g[p] = (coeffs[p] - prev) / h;
            prev = coeffs[p];
        }
        g[m] = -prev / h;
    };

    out[0].mesh = mesh_;
    out[0].coeffs.resize(m);
    factor.solve(load_, out[0].coeffs);
    fill_gradient(0);

    for (std::size_t mi = 1; mi < mu_set_.size(); ++mi) {
        std::fill(q.begin(), q.end(), 0.0);
        for (const Term& term : terms_[mi]) {
            const double* pw = psi_pow_.data() + term.pow_pos * ne;
            const double* g = grads.data() + term.nu_pos * ne;
            const double c = term.coeff;
            for (std::size_t e = 0; e < ne; ++e)
                q[e] += c * pw[e] * a_mid[e] * g[e];
        }
        for (int p = 0; p < m; ++p)
            rhs[p] = q[p + 1] - q[p];
        out[mi].mesh = mesh_;
        out[mi].coeffs.resize(m);
        factor.solve(rhs, out[mi].coeffs);
        fill_gradient(mi);
    }
}

std::map<MultiIndex, FemSolution> DerivativeSolver::solve_map(
    std::span<const double> y) const {
    std::vector<FemSolution> solutions;
    solve_all(y, solutions);
    std::map<MultiIndex, FemSolution> out;
    for (std::size_t k = 0; k < mu_set_.size(); ++k)
        out.emplace(mu_set_[k], std::move(solutions[k]));
    return out;
}

std::map<MultiIndex, FemSolution> derivative_recursion(const FieldSample& sample,
                                                       const MultiIndex& mu_cap,
                                                       const Mesh1D& mesh,
                                                       const ScalarField& f_at) {
    if (sample.system == nullptr)
        throw std::invalid_argument("field sample has no function system");
    DerivativeSolver solver(*sample.system, sample.dims(), mesh, f_at, mu_cap);
    return solver.solve_map(sample.y);
}

StabilityGap stability_gap(const ScalarField& a1, const ScalarField& a2,
                           const ScalarField& f_at, const Mesh1D& mesh) {
    const auto a1_mid = coefficient_at_midpoints(a1, mesh);
    const auto a2_mid = coefficient_at_midpoints(a2, mesh);
    const auto load = load_vector(f_at, mesh);
    const FemSolution u1 = assemble_solve(a1_mid, load, mesh);
    const FemSolution u2 = assemble_solve(a2_mid, load, mesh);

    FemSolution diff{mesh, u1.coeffs};
    for (int p = 0; p < mesh.m; ++p)
        diff.coeffs[p] -= u2.coeffs[p];

    double gap = 0.0, amin1 = a1_mid[0], amin2 = a2_mid[0];
    for (int e = 0; e < mesh.elements(); ++e) {
        gap = std::max(gap, std::abs(a1_mid[e] - a2_mid[e]));
        amin1 = std::min(amin1, a1_mid[e]);
        amin2 = std::min(amin2, a2_mid[e]);
    }
    const double fstar = dual_norm_estimate(f_at, mesh);
    const double amin = std::min(amin1, amin2);
    return {v_norm(diff), fstar * gap / (amin * amin)};
}

MultiIndex uniform_cap(std::size_t J, std::uint32_t degree) {
    std::vector<MultiIndex::Entry> entries;
    entries.reserve(J);
    for (std::size_t j = 1; j <= J; ++j)
        entries.emplace_back(static_cast<std::uint32_t>(j), degree);
    return MultiIndex::from_entries(std::move(entries));
}

DerivativeBoundCheck pointwise_derivative_bound_check(const DerivativeSolver& solver,
                                                      std::span<const double> y,
                                                      const WeightSequence& w, double K) {
    w.validate();
    const double c_r = std::numbers::ln2 / std::sqrt(static_cast<double>(w.r));
    if (!(K >= 0.0) || !(K < c_r))
        throw std::domain_error("requires K < ln(2)/sqrt(r)");
    const std::size_t J = solver.table().dims();
    const Mesh1D mesh = solver.table().mesh();

    std::vector<FemSolution> solutions;
    solver.solve_all(y, solutions);

    std::vector<double> a_mid(mesh.elements());
    solver.table().coefficient_at_midpoints(y, a_mid);

    std::vector<double> rho(J);
    for (std::size_t j = 1; j <= J; ++j)
        rho[j - 1] = w.rho(j);

    CompensatedSum lhs;
    const auto& mu_set = solver.derivative_set();
    for (std::size_t k = 0; k < mu_set.size(); ++k) {
        double factor = 1.0;
        for (const auto& [j, d] : mu_set[k].entries())
            for (std::uint32_t t = 0; t < d; ++t)
                factor *= rho[j - 1] * rho[j - 1];
        factor /= mu_set[k].factorial_as_double();
        const double an = a_norm(solutions[k], a_mid);
        lhs.add(factor * an * an);
    }

    const double an0 = a_norm(solutions[0], a_mid);
    const double delta = K / c_r;
    return {lhs.value(), an0 * an0 / (1.0 - delta)};
}

DerivativeBoundCheck pointwise_derivative_bound_check(const FieldSample& sample,
                                                      const WeightSequence& w, double K,
                                                      const Mesh1D& mesh,
                                                      const ScalarField& f_at) {
    if (sample.system == nullptr)
        throw std::invalid_argument("field sample has no function system");
    DerivativeSolver solver(*sample.system, sample.dims(), mesh, f_at,
                            uniform_cap(sample.dims(), static_cast<std::uint32_t>(w.r)));
    return pointwise_derivative_bound_check(solver, sample.y, w, K);
}

double dual_norm_estimate(const ScalarField& f_at, const Mesh1D& mesh) {
    return v_norm(assemble_solve([](double) { return 1.0; }, f_at, mesh));
}

} // namespace lognpce
