#include "lognpce/hermite.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>

namespace lognpce {

namespace {

void check_degree(int degree) {
    if (degree < 0)
        throw std::invalid_argument("Hermite degree must be nonnegative");
    if (degree > kMaxHermiteDegree)
        throw std::invalid_argument("Hermite degree capped at 64");
}

} // namespace

double hermite_eval(int degree, double t) {
    check_degree(degree);
    if (degree == 0)
        return 1.0;
    double prev = 1.0; // H_0
    double cur = t;    // H_1
    for (int k = 1; k < degree; ++k) {
        const double next = (t * cur - std::sqrt(static_cast<double>(k)) * prev) /
                            std::sqrt(static_cast<double>(k + 1));
        prev = cur;
        cur = next;
    }
    return cur;
}

void hermite_eval_all(int max_degree, double t, std::span<double> out) {
    check_degree(max_degree);
    if (out.size() < static_cast<std::size_t>(max_degree) + 1)
        throw std::invalid_argument("output span too small");
    out[0] = 1.0;
    if (max_degree == 0)
        return;
    out[1] = t;
    for (int k = 1; k < max_degree; ++k)
        out[k + 1] = (t * out[k] - std::sqrt(static_cast<double>(k)) * out[k - 1]) /
                     std::sqrt(static_cast<double>(k + 1));
}

QuadratureRule1D gauss_hermite(int order) {
    if (order < 1)
        throw std::invalid_argument("quadrature order must be >= 1");
    if (order > kMaxHermiteDegree)
        throw std::invalid_argument("quadrature order capped at 64");

    QuadratureRule1D rule;
    rule.order = order;
    if (order == 1) {
        rule.nodes = {0.0};
        rule.weights = {1.0};
        return rule;
    }

    Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
    Eigen::VectorXd sub(order - 1);
    for (int k = 1; k < order; ++k)
        sub[k - 1] = std::sqrt(static_cast<double>(k));

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
    solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("tridiagonal eigensolver failed to converge");

    rule.nodes.resize(order);
    rule.weights.resize(order);
    std::vector<double> values(static_cast<std::size_t>(order) + 1);
    const double sqrt_n = std::sqrt(static_cast<double>(order));
    for (int i = 0; i < order; ++i) {
        double t = solver.eigenvalues()[i]; // ascending
        // Newton polish on H_order(t) = 0, using H_n'(t) = sqrt(n) H_{n-1}(t);
        // restores full relative accuracy of the extreme weights below.
        for (int step = 0; step < 2; ++step) {
            hermite_eval_all(order, t, values);
            t -= values[order] / (sqrt_n * values[order - 1]);
        }
        rule.nodes[i] = t;
        // Christoffel number: w = 1 / sum_{k<order} H_k(t)^2
        hermite_eval_all(order, t, values);
        double denom = 0.0;
        for (int k = 0; k < order; ++k)
            denom += values[k] * values[k];
        rule.weights[i] = 1.0 / denom;
    }

    // Enforce the exact symmetry of the rule and unit total weight.
    for (int i = 0, j = order - 1; i <= j; ++i, --j) {
        const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
        rule.nodes[i] = -x;
        rule.nodes[j] = x;
        const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
        rule.weights[i] = w;
        rule.weights[j] = w;
    }
    double total = 0.0;
    for (double w : rule.weights)
        total += w;
    for (double& w : rule.weights)
        w /= total;
    return rule;
}

double tensor_hermite_eval(const MultiIndex& nu, std::span<const double> y) {
    if (nu.max_coordinate() > y.size())
        throw std::invalid_argument("sample vector misses a coordinate in supp(nu)");
    double prod = 1.0;
    for (const auto& [j, d] : nu.entries())
        prod *= hermite_eval(static_cast<int>(d), y[j - 1]);
    return prod;
}

} // namespace lognpce
