#include "lognpce/pde.hpp"

#include "lognpce/rng.hpp"
#include "lognpce/stats.hpp"
#include "lognpce/summation.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

using namespace lognpce;

namespace {

const ScalarField one = [](double) { return 1.0; };

// H1 seminorm error of the P1 solution against u(x) = sin(pi x); the
// per-element integrals of (slope - pi cos(pi x))^2 are closed-form.
double manufactured_h1_error(const FemSolution& u) {
    const double h = u.mesh.h();
    const double pi = std::numbers::pi;
    CompensatedSum err;
    double prev = 0.0;
    for (int e = 0; e < u.mesh.elements(); ++e) {
        const double right = e < u.mesh.m ? u.coeffs[e] : 0.0;
        const double s = (right - prev) / h;
        prev = right;
        const double x0 = static_cast<double>(e) * h;
        const double x1 = x0 + h;
        const double dsin = std::sin(pi * x1) - std::sin(pi * x0);
        const double dsin2 = std::sin(2.0 * pi * x1) - std::sin(2.0 * pi * x0);
        const double int_cos_sq = 0.5 * h + dsin2 / (4.0 * pi);
        err.add(s * s * h - 2.0 * s * dsin + pi * pi * int_cos_sq);
    }
    return std::sqrt(std::max(0.0, err.value()));
}

} // namespace

TEST_SUITE("pde") {

TEST_CASE("nodal exactness for the unit problem") {
    const Mesh1D mesh{31};
    const FemSolution u = assemble_solve(one, one, mesh);
    for (int i = 1; i <= mesh.m; ++i) {
        const double x = mesh.node(i);
        CHECK(u.coeffs[i - 1] == doctest::Approx(0.5 * x * (1.0 - x)).epsilon(1e-13));
    }

    const FemSolution zero = assemble_solve(one, [](double) { return 0.0; }, mesh);
    for (double c : zero.coeffs)
        CHECK(c == 0.0);

    CHECK_THROWS_AS(assemble_solve([](double) { return -1.0; }, one, mesh),
                    std::domain_error);
}

TEST_CASE("first-order H1 convergence on the manufactured solution") {
    const double pi = std::numbers::pi;
    const ScalarField f = [pi](double x) { return pi * pi * std::sin(pi * x); };
    std::vector<std::size_t> ns;
    std::vector<double> errors;
    for (int m : {63, 127, 255, 511, 1023}) {
        const FemSolution u = assemble_solve(one, f, Mesh1D{m});
        ns.push_back(static_cast<std::size_t>(m + 1));
        errors.push_back(manufactured_h1_error(u));
    }
    const double rate = fit_rate(ns, errors);
    CHECK(rate == doctest::Approx(1.0).epsilon(0.1));
}

TEST_CASE("v_norm closed values") {
    const Mesh1D mesh{255};
    FemSolution zero{mesh, std::vector<double>(mesh.m, 0.0)};
    CHECK(v_norm(zero) == doctest::Approx(0.0));

    FemSolution parab{mesh, {}};
    parab.coeffs.resize(mesh.m);
    for (int i = 1; i <= mesh.m; ++i) {
        const double x = mesh.node(i);
        parab.coeffs[i - 1] = 0.5 * x * (1.0 - x);
    }
    const double h = mesh.h();
    // squared norm of the interpolant is 1/12 - h^2/12
    CHECK(v_norm(parab) * v_norm(parab) ==
          doctest::Approx(1.0 / 12.0 - h * h / 12.0).epsilon(1e-12));

    FemSolution hat{mesh, std::vector<double>(mesh.m, 0.0)};
    hat.coeffs[99] = 1.0;
    CHECK(v_norm(hat) == doctest::Approx(std::sqrt(2.0 / h)));
}

TEST_CASE("a_norm scaling and norm equivalence") {
    const Mesh1D mesh{127};
    const FemSolution u = assemble_solve(one, one, mesh);
    CHECK(a_norm(u, one) == doctest::Approx(v_norm(u)));
    CHECK(a_norm(u, [](double) { return 4.0; }) == doctest::Approx(2.0 * v_norm(u)));

    const auto sys = FunctionSystem::schauder();
    const std::size_t J = 7;
    const FieldMidpointTable table(sys, J, mesh);
    std::mt19937 gen(3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        const std::vector<double> y = draw_sample(99, static_cast<std::uint64_t>(trial), J);
        std::vector<double> a_mid(mesh.elements());
        table.coefficient_at_midpoints(y, a_mid);
        const double b_sup = table.field_sup(y);

        FemSolution v{mesh, std::vector<double>(mesh.m)};
        for (auto& c : v.coeffs)
            c = unit(gen);
        const double vn_sq = v_norm(v) * v_norm(v);
        const double an_sq = a_norm(v, a_mid) * a_norm(v, a_mid);
        CHECK(an_sq >= std::exp(-b_sup) * vn_sq * (1.0 - 1e-12));
        CHECK(an_sq <= std::exp(b_sup) * vn_sq * (1.0 + 1e-12));
    }
}

TEST_CASE("Galerkin residual and the samplewise well-posedness bound") {
    const Mesh1D mesh{255};
    const auto sys = FunctionSystem::schauder();
    const std::size_t J = 10;
    const FieldMidpointTable table(sys, J, mesh);
    const std::vector<double> load = load_vector(one, mesh);
    const double fstar = dual_norm_estimate(one, mesh);

    for (std::uint64_t i = 0; i < 50; ++i) {
        const std::vector<double> y = draw_sample(2024, i, J);
        std::vector<double> a_mid(mesh.elements());
        table.coefficient_at_midpoints(y, a_mid);
        const FemSolution u = assemble_solve(a_mid, load, mesh);
        CHECK(relative_residual(u, a_mid, load) <= 1e-12);
        CHECK(v_norm(u) <= fstar * std::exp(table.field_sup(y)));
    }
}

TEST_CASE("derivative recursion: zero order reproduces the solve") {
    const Mesh1D mesh{63};
    const auto sys = FunctionSystem::schauder();
    FieldSample sample{&sys, draw_sample(7, 0, 3)};
    const auto derivatives = derivative_recursion(sample, MultiIndex::unit(2), mesh, one);
    const FemSolution direct = assemble_solve(
        [&](double x) { return std::exp(field_eval(sample, x)); }, one, mesh);
    const auto& u0 = derivatives.at(MultiIndex{});
    // same quadrature points, same solver; midpoint coefficient evaluation
    for (int p = 0; p < mesh.m; ++p)
        CHECK(u0.coeffs[p] == doctest::Approx(direct.coeffs[p]).epsilon(1e-13));
}

TEST_CASE("derivative recursion: constant field has geometric derivatives") {
    const Mesh1D mesh{127};
    const double c = 0.5;
    const auto sys = FunctionSystem::constant_single(c);
    const double y1 = 0.8;
    FieldSample sample{&sys, {y1}};
    const auto derivatives = derivative_recursion(sample, MultiIndex::unit(1, 4), mesh, one);
    const auto& u0 = derivatives.at(MultiIndex{});
    for (std::uint32_t k = 1; k <= 4; ++k) {
        const auto& du = derivatives.at(MultiIndex::unit(1, k));
        const double factor = std::pow(-c, static_cast<double>(k));
        for (int p = 0; p < mesh.m; ++p)
            CHECK(du.coeffs[p] ==
                  doctest::Approx(factor * u0.coeffs[p]).epsilon(1e-8));
    }
}

TEST_CASE("derivative recursion matches central finite differences") {
    const Mesh1D mesh{127};
    const auto sys = FunctionSystem::schauder();
    const std::size_t J = 3;
    const FieldMidpointTable table(sys, J, mesh);
    const std::vector<double> load = load_vector(one, mesh);
    const double fd_h = 1e-4;

    for (std::uint64_t i = 0; i < 3; ++i) {
        FieldSample sample{&sys, draw_sample(55, i, J)};
        const auto derivatives =
            derivative_recursion(sample, uniform_cap(J, 1), mesh, one);
        for (std::size_t j = 1; j <= J; ++j) {
            std::vector<double> yp = sample.y, ym = sample.y;
            yp[j - 1] += fd_h;
            ym[j - 1] -= fd_h;
            std::vector<double> ap(mesh.elements()), am(mesh.elements());
            table.coefficient_at_midpoints(yp, ap);
            table.coefficient_at_midpoints(ym, am);
            const FemSolution up = assemble_solve(ap, load, mesh);
            const FemSolution um = assemble_solve(am, load, mesh);
            const auto& du = derivatives.at(MultiIndex::unit(static_cast<std::uint32_t>(j)));
            const double scale = v_norm(du);
            FemSolution fd{mesh, std::vector<double>(mesh.m)};
            for (int p = 0; p < mesh.m; ++p)
                fd.coeffs[p] = (up.coeffs[p] - um.coeffs[p]) / (2.0 * fd_h) - du.coeffs[p];
            CHECK(v_norm(fd) <= 1e-5 * std::max(scale, 1e-10));
        }
    }
}

TEST_CASE("mixed-derivative assembly is insensitive to the term order") {
    const Mesh1D mesh{63};
    const auto sys = FunctionSystem::schauder();
    const std::size_t J = 3;
    FieldSample sample{&sys, draw_sample(17, 4, J)};
    const auto first = derivative_recursion(sample, uniform_cap(J, 1), mesh, one);

    // reassemble d^{e1+e2} u by hand, summing the recursion terms in the two
    // opposite orders
    std::vector<double> a_mid(mesh.elements());
    FieldMidpointTable table(sys, J, mesh);
    table.coefficient_at_midpoints(sample.y, a_mid);
    const TridiagonalFactor factor(a_mid, mesh);
    const double h = mesh.h();

    auto gradient = [&](const FemSolution& u) {
        std::vector<double> g(mesh.elements());
        double prev = 0.0;
        for (int p = 0; p < mesh.m; ++p) {
            g[p] = (u.coeffs[p] - prev) / h;
            prev = u.coeffs[p];
        }
        g[mesh.m] = -prev / h;
        return g;
    };

    const MultiIndex e1 = MultiIndex::unit(1), e2 = MultiIndex::unit(2);
    struct TermSpec {
        std::vector<std::size_t> psi; // coordinate factors of psi^{mu-nu}
        const FemSolution* w;
    };
    const TermSpec t1{{2}, &first.at(e1)};           // psi_2 * d^{e1} u
    const TermSpec t2{{1}, &first.at(e2)};           // psi_1 * d^{e2} u
    const TermSpec t3{{1, 2}, &first.at(MultiIndex{})}; // psi_1 psi_2 * u

    auto solve_with_order = [&](std::vector<const TermSpec*> terms) {
        std::vector<double> q(mesh.elements(), 0.0);
        for (const TermSpec* term : terms) {
            const auto g = gradient(*term->w);
            for (int e = 0; e < mesh.elements(); ++e) {
                double p = a_mid[e] * g[e];
                for (std::size_t j : term->psi)
                    p *= table.row(j)[e];
                q[e] += p;
            }
        }
        std::vector<double> rhs(mesh.m);
        for (int p = 0; p < mesh.m; ++p)
            rhs[p] = q[p + 1] - q[p];
        return factor.solve(rhs);
    };

    const auto ij = solve_with_order({&t1, &t2, &t3});
    const auto ji = solve_with_order({&t2, &t1, &t3});
    const auto& reference = first.at(MultiIndex::from_entries({{1, 1}, {2, 1}}));
    double scale = 0.0;
    for (double v : reference.coeffs)
        scale = std::max(scale, std::abs(v));
    for (int p = 0; p < mesh.m; ++p) {
        CHECK(std::abs(ij[p] - ji[p]) <= 1e-13 * std::max(scale, 1e-30));
        CHECK(std::abs(ij[p] - reference.coeffs[p]) <= 1e-12 * std::max(scale, 1e-30));
    }
}

TEST_CASE("stability gap") {
    const Mesh1D mesh{127};
    SUBCASE("identical coefficients") {
        const auto gap = stability_gap(one, one, one, mesh);
        CHECK(gap.lhs == doctest::Approx(0.0));
        CHECK(gap.rhs == doctest::Approx(0.0));
    }
    SUBCASE("constant perturbations") {
        for (double eps : {0.1, 0.01}) {
            const auto gap = stability_gap(
                one, [eps](double) { return 1.0 + eps; }, one, mesh);
            CHECK(gap.lhs > 0.0);
            CHECK(gap.lhs <= gap.rhs);
        }
    }
    SUBCASE("random lognormal pairs") {
        const auto sys = FunctionSystem::schauder();
        const std::size_t J = 6;
        for (std::uint64_t i = 0; i < 100; ++i) {
            FieldSample s1{&sys, draw_sample(31, 2 * i, J)};
            FieldSample s2{&sys, draw_sample(31, 2 * i + 1, J)};
            const auto gap = stability_gap(
                [&](double x) { return std::exp(field_eval(s1, x)); },
                [&](double x) { return std::exp(field_eval(s2, x)); }, one, mesh);
            CHECK(gap.lhs <= gap.rhs);
        }
    }
}

TEST_CASE("pointwise derivative bound") {
    const Mesh1D mesh{127};
    SUBCASE("zero field: only mu = 0 contributes") {
        const auto sys = FunctionSystem::constant_single(0.0);
        FieldSample sample{&sys, {1.3}};
        const WeightSequence w{WeightRule::power(1.0, 0.0), 1};
        const auto check = pointwise_derivative_bound_check(sample, w, 0.0, mesh, one);
        const FemSolution u = assemble_solve(one, one, mesh);
        const double an_sq = v_norm(u) * v_norm(u); // a == 1
        CHECK(check.lhs == doctest::Approx(an_sq).epsilon(1e-12));
        CHECK(check.rhs >= check.lhs);
    }
    SUBCASE("constant field closed form") {
        const double c = 0.4, rho = 1.0; // rho*c = 0.4 < ln 2
        const auto sys = FunctionSystem::constant_single(c);
        FieldSample sample{&sys, {-0.7}};
        const WeightSequence w{WeightRule::power(rho, 0.0), 1};
        const auto check = pointwise_derivative_bound_check(sample, w, rho * c, mesh, one);
        // du = -c u, so lhs = (1 + rho^2 c^2) a_norm(u)^2
        const auto derivatives =
            derivative_recursion(sample, MultiIndex::unit(1, 1), mesh, one);
        const double an = a_norm(derivatives.at(MultiIndex{}),
                                 [&](double x) { return std::exp(field_eval(sample, x)); });
        CHECK(check.lhs ==
              doctest::Approx((1.0 + rho * rho * c * c) * an * an).epsilon(1e-10));
        CHECK(check.lhs <= check.rhs);

        const double delta = rho * c / std::numbers::ln2;
        const bool closed_form_holds = rho * rho * c * c <= delta / (1.0 - delta);
        CHECK(closed_form_holds == (check.lhs <= check.rhs));
    }
    SUBCASE("precondition violations are rejected") {
        const auto sys = FunctionSystem::constant_single(0.5);
        FieldSample sample{&sys, {0.0}};
        const WeightSequence w{WeightRule::power(1.0, 0.0), 1};
        CHECK_THROWS_AS(
            pointwise_derivative_bound_check(sample, w, std::numbers::ln2, mesh, one),
            std::domain_error);
    }
    SUBCASE("schauder samples near the admissible boundary") {
        const auto sys = FunctionSystem::schauder();
        const std::size_t J = 7;
        const int r = 2;
        const double c_r = std::numbers::ln2 / std::sqrt(2.0);
        WeightSequence w{WeightRule::dyadic_level(1.0, 0.25), r};
        const auto base = sup_weighted_sum(sys, w, J, 4097);
        const double target = 0.9 * c_r;
        w.rho = w.rho.scaled_by(target / base.grid_value);
        const double K = target;

        DerivativeSolver solver(sys, J, Mesh1D{63}, one,
                                uniform_cap(J, static_cast<std::uint32_t>(r)));
        for (std::uint64_t i = 0; i < 10; ++i) {
            const auto y = draw_sample(404, i, J);
            const auto check = pointwise_derivative_bound_check(solver, y, w, K);
            CHECK(check.lhs <= check.rhs);
        }
    }
}

} // TEST_SUITE
