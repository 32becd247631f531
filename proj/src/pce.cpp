#include "lognpce/pce.hpp"

#include "lognpce/hermite.hpp"
#include "lognpce/parallel.hpp"
#include "lognpce/summation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_set>

namespace lognpce {

namespace {

constexpr double kMaxTensorNodes = 1e7;
constexpr double kMaxTensorSolves = 1e8;
constexpr std::size_t kMaxChunks = 64;
constexpr std::size_t kMinChunkNodes = 256;

std::size_t checked_tensor_nodes(int quad_order, std::size_t J, double per_node_cost) {
    const double nodes = std::pow(static_cast<double>(quad_order), static_cast<double>(J));
    if (nodes > kMaxTensorNodes)
        throw GuardError("tensor grid of " + std::to_string(nodes) +
                         " nodes exceeds the 1e7 guard");
    if (nodes * per_node_cost > kMaxTensorSolves)
        throw GuardError("tensor sweep would need more than 1e8 solves");
    return static_cast<std::size_t>(nodes);
}

// Digits of the lexicographic node sweep, coordinate 1 slowest.
void node_digits(std::size_t node, int quad_order, std::span<std::size_t> digits) {
    for (std::size_t j = digits.size(); j-- > 0;) {
        digits[j] = node % static_cast<std::size_t>(quad_order);
        node /= static_cast<std::size_t>(quad_order);
    }
}

// Per-entry compensated accumulators for a matrix of running sums.
struct CompensatedBlock {
    std::vector<double> sum;
    std::vector<double> comp;

    void resize(std::size_t n) {
        sum.assign(n, 0.0);
        comp.assign(n, 0.0);
    }
    void add(std::size_t k, double x) {
        const double s = sum[k];
        const double t = s + x;
        comp[k] += std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s;
        sum[k] = t;
    }
    void merge(const CompensatedBlock& other) {
        for (std::size_t k = 0; k < sum.size(); ++k) {
            add(k, other.sum[k]);
            add(k, other.comp[k]);
        }
    }
    double value(std::size_t k) const { return sum[k] + comp[k]; }
};

void validate_lambda(std::span<const MultiIndex> lambda, std::size_t J, int quad_order) {
    std::unordered_set<MultiIndex, MultiIndexHash> members(lambda.begin(), lambda.end());
    if (members.size() != lambda.size())
        throw std::invalid_argument("duplicate indices in lambda");
    for (const MultiIndex& nu : lambda) {
        if (nu.max_coordinate() > J)
            throw std::invalid_argument("lambda index " + nu.to_string() +
                                        " reaches beyond dimension " + std::to_string(J));
        if (nu.max_degree() >= static_cast<std::uint32_t>(quad_order))
            throw std::invalid_argument("lambda degree not resolvable at quad_order " +
                                        std::to_string(quad_order));
        for (const auto& [j, d] : nu.entries())
            if (!members.contains(nu.with_increment(j, -1)))
                throw std::invalid_argument("lambda is not downward closed at " +
                                            nu.to_string());
    }
}

} // namespace

const HermiteCoefficient* PceExpansion::find(const MultiIndex& nu) const {
    auto it = std::lower_bound(coefficients.begin(), coefficients.end(), nu,
                               [](const HermiteCoefficient& c, const MultiIndex& v) {
                                   return c.nu < v;
                               });
    return (it != coefficients.end() && it->nu == nu) ? &*it : nullptr;
}

double PceExpansion::l2_norm_sq() const {
    CompensatedSum sum;
    for (const auto& c : coefficients)
        sum.add(c.norm_v * c.norm_v);
    return sum.value();
}

PceExpansion compute_expansion(const FunctionSystem& system, std::size_t J,
                               std::span<const MultiIndex> lambda, int quad_order,
                               const Mesh1D& mesh, const ScalarField& f_at, int threads) {
    if (J == 0)
        throw std::invalid_argument("J must be >= 1");
    validate_lambda(lambda, J, quad_order);
    const std::size_t total_nodes = checked_tensor_nodes(quad_order, J, 1.0);

    std::vector<MultiIndex> indices(lambda.begin(), lambda.end());
    std::sort(indices.begin(), indices.end());
    const std::size_t n_coeff = indices.size();
    const auto m = static_cast<std::size_t>(mesh.m);

    const QuadratureRule1D rule = gauss_hermite(quad_order);
    const auto q = static_cast<std::size_t>(quad_order);

    // Hermite values H_d(node_i), i major.
    std::vector<double> hermite_table(q * q);
    for (std::size_t i = 0; i < q; ++i)
        hermite_eval_all(quad_order - 1, rule.nodes[i],
                         {hermite_table.data() + i * q, q});

    const FieldMidpointTable table(system, J, mesh);
    const std::vector<double> load = load_vector(f_at, mesh);

    const ChunkPlan plan = ChunkPlan::make(total_nodes, kMaxChunks, kMinChunkNodes);
    const std::size_t n_chunks = plan.chunks();
    std::vector<CompensatedBlock> coeff_blocks(n_chunks);
    std::vector<CompensatedSum> norm_blocks(n_chunks);

    run_chunks(plan, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        CompensatedBlock& acc = coeff_blocks[chunk];
        acc.resize(n_coeff * m);
        CompensatedSum& norm_acc = norm_blocks[chunk];

        std::vector<std::size_t> digits(J);
        std::vector<double> t(J);
        std::vector<double> a_mid(mesh.elements());
        std::vector<double> u(m);

        node_digits(begin, quad_order, digits);
        for (std::size_t node = begin; node < end; ++node) {
            double weight = 1.0;
            for (std::size_t j = 0; j < J; ++j) {
                t[j] = rule.nodes[digits[j]];
                weight *= rule.weights[digits[j]];
            }
            table.field_at_midpoints(t, a_mid);
            for (double& v : a_mid)
                v = std::exp(v);
            const TridiagonalFactor factor(a_mid, mesh);
            factor.solve(load, u);

            {
                double vn_sq = 0.0, prev = 0.0;
                for (std::size_t p = 0; p < m; ++p) {
                    const double d = u[p] - prev;
                    vn_sq += d * d;
                    prev = u[p];
                }
                vn_sq = (vn_sq + prev * prev) * (mesh.m + 1);
                norm_acc.add(weight * vn_sq);
            }

            for (std::size_t k = 0; k < n_coeff; ++k) {
                double hval = 1.0;
                for (const auto& [j, d] : indices[k].entries())
                    hval *= hermite_table[digits[j - 1] * q + d];
                const double c = weight * hval;
                const std::size_t base = k * m;
                for (std::size_t p = 0; p < m; ++p)
                    acc.add(base + p, c * u[p]);
            }

            // advance the odometer (coordinate J fastest)
            for (std::size_t j = J; j-- > 0;) {
                if (++digits[j] < q)
                    break;
                digits[j] = 0;
            }
        }
    });

    // fixed-order merge
    CompensatedBlock total;
    total.resize(n_coeff * m);
    CompensatedSum norm_total;
    for (std::size_t c = 0; c < n_chunks; ++c) {
        total.merge(coeff_blocks[c]);
        norm_total.merge(norm_blocks[c]);
        coeff_blocks[c] = CompensatedBlock{};
    }

    PceExpansion expansion;
    expansion.system = system;
    expansion.J = J;
    expansion.quad_order = quad_order;
    expansion.mesh = mesh;
    expansion.mean_square_norm = norm_total.value();
    expansion.tensor_nodes = total_nodes;
    expansion.coefficients.resize(n_coeff);
    for (std::size_t k = 0; k < n_coeff; ++k) {
        HermiteCoefficient& coeff = expansion.coefficients[k];
        coeff.nu = indices[k];
        coeff.u_nu.mesh = mesh;
        coeff.u_nu.coeffs.resize(m);
        for (std::size_t p = 0; p < m; ++p)
            coeff.u_nu.coeffs[p] = total.value(k * m + p);
        coeff.norm_v = v_norm(coeff.u_nu);
    }
    return expansion;
}

namespace {

std::vector<double> sorted_norms_desc(const PceExpansion& expansion) {
    std::vector<std::size_t> order(expansion.coefficients.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        order[k] = k;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double na = expansion.coefficients[a].norm_v;
        const double nb = expansion.coefficients[b].norm_v;
        if (na != nb)
            return na > nb;
        return expansion.coefficients[a].nu < expansion.coefficients[b].nu;
    });
    std::vector<double> norms(order.size());
    for (std::size_t k = 0; k < order.size(); ++k)
        norms[k] = expansion.coefficients[order[k]].norm_v;
    return norms;
}

} // namespace

std::vector<TruncationError> best_n_term_errors(const PceExpansion& expansion,
                                                std::span<const std::size_t> ns) {
    const std::vector<double> norms = sorted_norms_desc(expansion);
    for (std::size_t n : ns)
        if (n > norms.size())
            throw std::invalid_argument("n exceeds the computed set size");
    const double full = stechkin_tail(norms, 0);
    std::vector<TruncationError> out;
    out.reserve(ns.size());
    for (std::size_t n : ns) {
        const double tail = stechkin_tail(norms, n);
        out.push_back({n, full > 0.0 ? tail / full : 0.0});
    }
    return out;
}

std::vector<AprioriError> apriori_errors(const PceExpansion& expansion,
                                         const WeightSequence& w,
                                         std::span<const std::size_t> ns) {
    if (ns.empty())
        return {};
    const std::size_t n_max = *std::max_element(ns.begin(), ns.end());
    const WeightEnumeration enumeration =
        enumerate_smallest_weights(n_max + 1, w, static_cast<std::uint32_t>(expansion.J));

    std::unordered_set<MultiIndex, MultiIndexHash> computed;
    for (const auto& c : expansion.coefficients)
        computed.insert(c.nu);
    for (std::size_t k = 0; k < n_max; ++k)
        if (!computed.contains(enumeration.items[k].nu))
            throw CoverageError(k + 1, enumeration.items[k].nu);

    const double full = std::sqrt(expansion.l2_norm_sq());

    CompensatedSum weighted;
    for (const auto& c : expansion.coefficients)
        weighted.add(weight_b(c.nu, w) * c.norm_v * c.norm_v);
    const double weighted_norm = std::sqrt(weighted.value());

    std::vector<AprioriError> out;
    out.reserve(ns.size());
    for (std::size_t n : ns) {
        std::unordered_set<MultiIndex, MultiIndexHash> selected;
        selected.reserve(n);
        for (std::size_t k = 0; k < n; ++k)
            selected.insert(enumeration.items[k].nu);
        CompensatedSum tail_sq;
        for (const auto& c : expansion.coefficients)
            if (!selected.contains(c.nu))
                tail_sq.add(c.norm_v * c.norm_v);
        const double error = full > 0.0 ? std::sqrt(tail_sq.value()) / full : 0.0;
        // smallest excluded weight: the (n+1)-st enumerated entry
        const double b_out = enumeration.items[n].weight;
        const double bound = full > 0.0 ? weighted_norm / (std::sqrt(b_out) * full) : 0.0;
        out.push_back({n, error, bound});
    }
    return out;
}

IdentityReport identity_check(const FunctionSystem& system, std::size_t J,
                              const WeightSequence& w, int quad_order, const Mesh1D& mesh,
                              const ScalarField& f_at, std::uint32_t degree_cap,
                              int threads) {
    w.validate();
    if (J == 0)
        throw std::invalid_argument("J must be >= 1");

    // right side: weighted coefficient sum at the truncated degrees
    const std::vector<MultiIndex> lambda = total_degree_set(
        J, degree_cap, static_cast<std::uint32_t>(quad_order - 1));
    const PceExpansion expansion =
        compute_expansion(system, J, lambda, quad_order, mesh, f_at, threads);

    IdentityReport report;
    report.per_nu.reserve(expansion.coefficients.size());
    CompensatedSum rhs;
    for (const auto& c : expansion.coefficients) {
        const double b = weight_b(c.nu, w);
        const double norm_sq = c.norm_v * c.norm_v;
        rhs.add(b * norm_sq);
        report.per_nu.push_back({c.nu, b, norm_sq});
    }
    report.rhs = rhs.value();

    // left side: derivative integrals over the same quadrature grid
    const MultiIndex mu_cap = uniform_cap(J, static_cast<std::uint32_t>(w.r));
    const DerivativeSolver solver(system, J, mesh, f_at, mu_cap);
    const std::size_t n_mu = solver.derivative_set().size();
    const std::size_t total_nodes =
        checked_tensor_nodes(quad_order, J, static_cast<double>(n_mu));

    const QuadratureRule1D rule = gauss_hermite(quad_order);
    const auto q = static_cast<std::size_t>(quad_order);

    const ChunkPlan plan = ChunkPlan::make(total_nodes, kMaxChunks, kMinChunkNodes);
    const std::size_t n_chunks = plan.chunks();
    std::vector<std::vector<CompensatedSum>> mu_blocks(n_chunks);

    run_chunks(plan, threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        auto& acc = mu_blocks[chunk];
        acc.assign(n_mu, CompensatedSum{});
        std::vector<std::size_t> digits(J);
        std::vector<double> t(J);
        std::vector<FemSolution> solutions;

        node_digits(begin, quad_order, digits);
        for (std::size_t node = begin; node < end; ++node) {
            double weight = 1.0;
            for (std::size_t j = 0; j < J; ++j) {
                t[j] = rule.nodes[digits[j]];
                weight *= rule.weights[digits[j]];
            }
            solver.solve_all(t, solutions);
            for (std::size_t k = 0; k < n_mu; ++k) {
                const double vn = v_norm(solutions[k]);
                acc[k].add(weight * vn * vn);
            }
            for (std::size_t j = J; j-- > 0;) {
                if (++digits[j] < q)
                    break;
                digits[j] = 0;
            }
        }
    });

    std::vector<CompensatedSum> integrals(n_mu);
    for (std::size_t c = 0; c < n_chunks; ++c)
        for (std::size_t k = 0; k < n_mu; ++k)
            integrals[k].merge(mu_blocks[c][k]);

    std::vector<double> rho(J);
    for (std::size_t j = 1; j <= J; ++j)
        rho[j - 1] = w.rho(j);

    CompensatedSum lhs;
    report.per_mu.reserve(n_mu);
    for (std::size_t k = 0; k < n_mu; ++k) {
        const MultiIndex& mu = solver.derivative_set()[k];
        double factor = 1.0;
        for (const auto& [j, d] : mu.entries())
            for (std::uint32_t t2 = 0; t2 < d; ++t2)
                factor *= rho[j - 1] * rho[j - 1];
        factor /= mu.factorial_as_double();
        const double contribution = factor * integrals[k].value();
        lhs.add(contribution);
        report.per_mu.push_back({mu, contribution});
    }
    report.lhs = lhs.value();
    report.rel_gap = report.lhs != 0.0
                         ? std::abs(report.lhs - report.rhs) / std::abs(report.lhs)
                         : std::abs(report.rhs);
    return report;
}

} // namespace lognpce
