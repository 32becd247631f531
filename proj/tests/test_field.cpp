#include "lognpce/field.hpp"

#include "lognpce/rng.hpp"
#include "lognpce/summation.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

using namespace lognpce;

namespace {

double bridge_covariance(double x, double xp) {
    return std::min(x, xp) - x * xp;
}

// truncated analytic covariance sum_{j<=J} psi_j(x) psi_j(x')
double truncated_covariance(const FunctionSystem& system, std::size_t J, double x,
                            double xp) {
    CompensatedSum sum;
    for (std::size_t j = 1; j <= J; ++j)
        sum.add(system.eval(j, x) * system.eval(j, xp));
    return sum.value();
}

} // namespace

TEST_SUITE("field") {

TEST_CASE("kl_eval closed values") {
    CHECK(kl_eval(1, 0.5) == doctest::Approx(std::numbers::sqrt2 / std::numbers::pi));
    CHECK(kl_eval(2, 0.5) == doctest::Approx(0.0).epsilon(1e-14));
    for (std::size_t j = 1; j <= 6; ++j) {
        CHECK(std::abs(kl_eval(j, 0.0)) < 1e-15);
        CHECK(std::abs(kl_eval(j, 1.0)) < 1e-12);
    }
}

TEST_CASE("schauder_eval closed values") {
    CHECK(schauder_eval(0, 0, 0.5) == doctest::Approx(0.5));
    CHECK(schauder_eval(1, 0, 0.25) == doctest::Approx(0.5 / std::numbers::sqrt2));
    CHECK(schauder_eval(1, 1, 0.25) == doctest::Approx(0.0));
    CHECK_THROWS_AS(schauder_eval(1, 2, 0.5), std::invalid_argument);
}

TEST_CASE("system sup-norms and supports") {
    const auto kl = FunctionSystem::kl_brownian_bridge();
    CHECK(kl.sup_norm(3) == doctest::Approx(std::numbers::sqrt2 / (3.0 * std::numbers::pi)));

    const auto sch = FunctionSystem::schauder();
    CHECK(sch.sup_norm(1) == doctest::Approx(0.5));
    CHECK(sch.sup_norm(2) == doctest::Approx(0.5 / std::numbers::sqrt2)); // level 1
    CHECK(sch.sup_norm(5) == doctest::Approx(0.25));                      // level 2
    const Interval s5 = sch.support(5); // j = 5 -> level 2, k = 1
    CHECK(s5.lo == doctest::Approx(0.25));
    CHECK(s5.hi == doctest::Approx(0.5));

    const auto scaled = FunctionSystem::scaled_custom(2.0, 0.75);
    CHECK(scaled.sup_norm(1) == doctest::Approx(2.0));
    CHECK(scaled.sup_norm(2) == doctest::Approx(2.0 * std::exp2(-0.75)));
    CHECK(scaled.eval(1, 0.5) == doctest::Approx(2.0));

    const auto ind = FunctionSystem::disjoint_indicator({0.5, 0.25});
    CHECK(ind.sup_norm(1) == doctest::Approx(0.5));
    CHECK(ind.sup_norm(3) == doctest::Approx(0.0));
    CHECK(ind.eval(1, 0.2) == doctest::Approx(0.5));
    CHECK(ind.eval(2, 0.2) == doctest::Approx(0.0));
    CHECK(ind.eval(2, 0.9) == doctest::Approx(0.25));
}

TEST_CASE("evaluations vanish outside the support and stay below the sup-norm") {
    std::mt19937 gen(11);
    std::uniform_real_distribution<double> xs(0.0, 1.0);
    for (const auto& system :
         {FunctionSystem::schauder(), FunctionSystem::scaled_custom(1.3, 0.5),
          FunctionSystem::disjoint_indicator_power(1.0, 1.5)}) {
        for (std::size_t j = 1; j <= 20; ++j) {
            const Interval sup = system.support(j);
            for (int trial = 0; trial < 50; ++trial) {
                const double x = xs(gen);
                const double v = system.eval(j, x);
                CHECK(std::abs(v) <= system.sup_norm(j) + 1e-15);
                if (!sup.contains(x))
                    CHECK(v == 0.0);
            }
        }
    }
}

TEST_CASE("schauder functions of one level never overlap") {
    const auto sch = FunctionSystem::schauder();
    for (std::uint32_t l = 0; l <= 4; ++l) {
        for (int i = 0; i <= 512; ++i) {
            const double x = static_cast<double>(i) / 512.0;
            int active = 0;
            for (std::uint64_t k = 0; k < (std::uint64_t{1} << l); ++k)
                if (schauder_eval(l, k, x) != 0.0)
                    ++active;
            CHECK(active <= 1);
        }
    }
    (void)sch;
}

TEST_CASE("field_eval basics and linearity") {
    const auto kl = FunctionSystem::kl_brownian_bridge();
    FieldSample zero{&kl, {0.0, 0.0, 0.0}};
    CHECK(field_eval(zero, 0.37) == doctest::Approx(0.0));

    FieldSample one{&kl, {1.0}};
    CHECK(field_eval(one, 0.5) == doctest::Approx(std::numbers::sqrt2 / std::numbers::pi));

    const auto ind = FunctionSystem::disjoint_indicator({0.5, 2.0, 1.0});
    FieldSample s{&ind, {3.0, -1.0, 4.0}};
    CHECK(field_eval(s, 0.1) == doctest::Approx(3.0 * 0.5)); // cell 1
    CHECK(field_eval(s, 0.5) == doctest::Approx(-1.0 * 2.0)); // cell 2
    CHECK(field_eval(s, 0.9) == doctest::Approx(4.0 * 1.0));  // cell 3

    std::mt19937 gen(5);
    std::uniform_real_distribution<double> vals(-2.0, 2.0);
    const auto sch = FunctionSystem::schauder();
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> ya(6), yb(6), sum(6);
        for (std::size_t k = 0; k < 6; ++k) {
            ya[k] = vals(gen);
            yb[k] = vals(gen);
            sum[k] = ya[k] + yb[k];
        }
        const double x = (vals(gen) + 2.0) / 4.0;
        FieldSample a{&sch, ya}, b{&sch, yb}, c{&sch, sum};
        CHECK(field_eval(c, x) ==
              doctest::Approx(field_eval(a, x) + field_eval(b, x)).epsilon(1e-12));
    }
}

TEST_CASE("sup_weighted_sum: disjoint indicators with reciprocal weights") {
    // c_j = j^-2 against rho_j = j^2: every covered point sums to exactly 1
    const auto ind = FunctionSystem::disjoint_indicator_power(1.0, 2.0);
    const WeightSequence w{WeightRule::power(1.0, 2.0), 1};
    const auto result = sup_weighted_sum(ind, w, 8, 4097);
    CHECK(result.grid_value == doctest::Approx(1.0));
    CHECK(result.tail_finite);
    CHECK(result.tail_bound == doctest::Approx(1.0));
}

TEST_CASE("sup_weighted_sum: schauder with dyadic weights below the geometric bound") {
    const double kappa = 0.25;
    const auto sch = FunctionSystem::schauder();
    const WeightSequence w{WeightRule::dyadic_level(1.0, kappa), 1};
    const std::size_t J = 7; // levels 0..2 complete
    const auto result = sup_weighted_sum(sch, w, J, 4097);

    // level-l contribution is at most 2^{(kappa-1/2)l}/2
    const double ratio = std::exp2(kappa - 0.5);
    const double full_bound = 0.5 / (1.0 - ratio);
    CHECK(result.grid_value <= full_bound);
    CHECK(result.grid_value > 0.5); // level 0 alone reaches 1/2 at x = 1/2... plus more
    CHECK(result.tail_finite);
    const double expected_tail = 0.5 * std::exp2(3.0 * kappa - 1.5) / (1.0 - ratio);
    CHECK(result.tail_bound == doctest::Approx(expected_tail).epsilon(1e-12));

    // grid value plus tail bound stays below the closed-form total
    CHECK(result.grid_value + result.tail_bound <=
          full_bound + result.tail_bound + 1e-12);
}

TEST_CASE("sup_weighted_sum: KL with constant weights diverges") {
    const auto kl = FunctionSystem::kl_brownian_bridge();
    const WeightSequence w{WeightRule::power(1.0, 0.0), 1};
    const auto result = sup_weighted_sum(kl, w, 32, 2049);
    CHECK_FALSE(result.tail_finite);
    CHECK(result.grid_value > 0.0);

    // harmonic growth of the partial sums at x = 1/2-ish
    const auto small = sup_weighted_sum(kl, w, 8, 2049);
    CHECK(result.grid_value > small.grid_value);
}

TEST_CASE("exp-square summability checks") {
    SUBCASE("rho_j = j certifies quickly") {
        const auto res = check_exp_sq_summability(WeightRule::power(1.0, 1.0), 8);
        CHECK(res.satisfied());
        CHECK(res.partial_sum < 0.5);
        CHECK(res.tail_bound < 1e-20);
    }
    SUBCASE("constant rho diverges") {
        const auto res = check_exp_sq_summability(WeightRule::power(1.0, 0.0), 50);
        CHECK(res.outcome == ExpSqSummability::Outcome::divergent);
    }
    SUBCASE("sqrt-log rule reduces to a p-series") {
        const auto res = check_exp_sq_summability(WeightRule::sqrt_log(1.0), 100);
        CHECK(res.satisfied());
        // sum_j (j+1)^-2 = pi^2/6 - 1
        const double exact = std::numbers::pi * std::numbers::pi / 6.0 - 1.0;
        CHECK(res.partial_sum <= exact);
        CHECK(res.partial_sum + res.tail_bound >= exact);
        CHECK(res.partial_sum == doctest::Approx(exact).epsilon(1e-2));
    }
    SUBCASE("sqrt-log below the summability threshold diverges") {
        const auto res = check_exp_sq_summability(WeightRule::sqrt_log(0.5), 100);
        CHECK(res.outcome == ExpSqSummability::Outcome::divergent);
    }
    SUBCASE("dyadic rule certifies via level blocks") {
        const auto res = check_exp_sq_summability(WeightRule::dyadic_level(1.0, 0.5), 8);
        CHECK(res.satisfied());
        CHECK(std::isfinite(res.tail_bound));
    }
    SUBCASE("explicit list with constant continuation diverges") {
        const auto res =
            check_exp_sq_summability(WeightRule::explicit_list({1.0, 2.0, 3.0}, 3.0), 4);
        CHECK(res.outcome == ExpSqSummability::Outcome::divergent);
    }
    SUBCASE("tiny truncation of a slowly growing power rule is inconclusive") {
        const auto res = check_exp_sq_summability(WeightRule::power(0.05, 0.05), 1);
        CHECK(res.outcome == ExpSqSummability::Outcome::unknown);
    }
}

TEST_CASE("Monte Carlo covariance matches the Brownian bridge") {
    const std::size_t N = 40000;
    const std::uint64_t seed = 1234;
    const std::vector<std::pair<double, double>> pairs{{0.3, 0.7}, {0.25, 0.5}, {0.2, 0.9}};

    SUBCASE("schauder") {
        const auto sys = FunctionSystem::schauder();
        const std::size_t J = 16;
        for (const auto& [x, xp] : pairs) {
            // distant pairs: the truncated covariance already equals the bridge
            const double truncated = truncated_covariance(sys, J, x, xp);
            CHECK(truncated == doctest::Approx(bridge_covariance(x, xp)).epsilon(1e-10));

            CompensatedSum sum, sum_sq;
            for (std::size_t i = 0; i < N; ++i) {
                double bx = 0.0, bxp = 0.0;
                for (std::size_t j = 1; j <= J; ++j) {
                    const double yj = gaussian_variate(seed, i, j);
                    bx += yj * sys.eval(j, x);
                    bxp += yj * sys.eval(j, xp);
                }
                sum.add(bx * bxp);
                sum_sq.add(bx * bxp * bx * bxp);
            }
            const double mean = sum.value() / static_cast<double>(N);
            const double var =
                (sum_sq.value() - static_cast<double>(N) * mean * mean) /
                static_cast<double>(N - 1);
            const double se = std::sqrt(var / static_cast<double>(N));
            CHECK(std::abs(mean - bridge_covariance(x, xp)) <= 3.0 * se);
        }
    }

    SUBCASE("kl") {
        const auto sys = FunctionSystem::kl_brownian_bridge();
        const std::size_t J = 64;
        for (const auto& [x, xp] : pairs) {
            // quantify the truncation bias directly
            CompensatedSum tail;
            for (std::size_t j = J + 1; j <= 400000; ++j)
                tail.add(sys.eval(j, x) * sys.eval(j, xp));
            const double reference = bridge_covariance(x, xp) - tail.value();

            CompensatedSum sum, sum_sq;
            for (std::size_t i = 0; i < N; ++i) {
                double bx = 0.0, bxp = 0.0;
                for (std::size_t j = 1; j <= J; ++j) {
                    const double yj = gaussian_variate(seed ^ 77, i, j);
                    bx += yj * sys.eval(j, x);
                    bxp += yj * sys.eval(j, xp);
                }
                sum.add(bx * bxp);
                sum_sq.add(bx * bxp * bx * bxp);
            }
            const double mean = sum.value() / static_cast<double>(N);
            const double var =
                (sum_sq.value() - static_cast<double>(N) * mean * mean) /
                static_cast<double>(N - 1);
            const double se = std::sqrt(var / static_cast<double>(N));
            CHECK(std::abs(mean - reference) <= 3.0 * se);
        }
    }
}

} // TEST_SUITE
