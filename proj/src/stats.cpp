#include "lognpce/stats.hpp"

#include "lognpce/parallel.hpp"
#include "lognpce/rng.hpp"
#include "lognpce/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lognpce {

namespace {

constexpr std::size_t kChunkSamples = 4096;
constexpr std::size_t kMaxChunks = 4096;

// psi_j at the points of a uniform grid, row-major by coordinate
struct GridTable {
    std::size_t J;
    std::size_t points;
    std::vector<double> values;

    GridTable(const FunctionSystem& system, std::size_t J_, std::size_t points_)
        : J(J_), points(points_), values(J_ * points_) {
        for (std::size_t j = 1; j <= J; ++j)
            for (std::size_t i = 0; i < points; ++i) {
                const double x = static_cast<double>(i) / static_cast<double>(points - 1);
                values[(j - 1) * points + i] = system.eval(j, x);
            }
    }

    double sup(std::span<const double> y) const {
        double best = 0.0;
        for (std::size_t i = 0; i < points; ++i) {
            double b = 0.0;
            for (std::size_t j = 0; j < J; ++j)
                b += y[j] * values[j * points + i];
            best = std::max(best, std::abs(b));
        }
        return best;
    }
};

struct MeanAccumulator {
    CompensatedSum sum;
    CompensatedSum sum_sq;
    bool overflow = false;

    void add(double x) {
        if (!std::isfinite(x)) {
            overflow = true;
            return;
        }
        sum.add(x);
        sum_sq.add(x * x);
    }
    void merge(const MeanAccumulator& other) {
        sum.merge(other.sum);
        sum_sq.merge(other.sum_sq);
        overflow = overflow || other.overflow;
    }
};

Estimate finalize(const MeanAccumulator& acc, std::size_t n) {
    Estimate est;
    est.overflow = acc.overflow;
    if (acc.overflow) {
        est.value = std::numeric_limits<double>::infinity();
        est.std_error = std::numeric_limits<double>::infinity();
        return est;
    }
    const double nd = static_cast<double>(n);
    est.value = acc.sum.value() / nd;
    if (n > 1) {
        const double var =
            std::max(0.0, (acc.sum_sq.value() - nd * est.value * est.value) / (nd - 1.0));
        est.std_error = std::sqrt(var / nd);
    }
    return est;
}

void check_config(const SampleConfig& cfg) {
    if (cfg.N == 0)
        throw std::invalid_argument("sample count must be >= 1");
    if (cfg.J == 0)
        throw std::invalid_argument("J must be >= 1");
    if (cfg.sup_grid < 2)
        throw std::invalid_argument("sup-norm grid needs at least two points");
}

} // namespace

std::vector<double> draw_sample(std::uint64_t seed, std::uint64_t index, std::size_t J) {
    std::vector<double> y(J);
    for (std::size_t j = 1; j <= J; ++j)
        y[j - 1] = gaussian_variate(seed, index, j);
    return y;
}

Estimate mc_exp_moment_b(const SampleConfig& cfg, double k) {
    check_config(cfg);
    if (k < 0.0)
        throw std::invalid_argument("exponent k must be nonnegative");
    const GridTable table(cfg.system, cfg.J, cfg.sup_grid);

    const ChunkPlan plan = ChunkPlan::make(cfg.N, kMaxChunks, kChunkSamples);
    std::vector<MeanAccumulator> blocks(plan.chunks());
    run_chunks(plan, cfg.threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        MeanAccumulator& acc = blocks[chunk];
        std::vector<double> y(cfg.J);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 1; j <= cfg.J; ++j)
                y[j - 1] = gaussian_variate(cfg.seed, i, j);
            acc.add(std::exp(k * table.sup(y)));
        }
    });

    MeanAccumulator total;
    for (const auto& block : blocks)
        total.merge(block);
    return finalize(total, cfg.N);
}

MomentRun mc_moment_u(const SampleConfig& cfg, double k) {
    check_config(cfg);
    if (k < 0.0)
        throw std::invalid_argument("exponent k must be nonnegative");

    const FieldMidpointTable table(cfg.system, cfg.J, cfg.mesh);
    const std::vector<double> load = load_vector(cfg.f_at, cfg.mesh);
    const double fstar = dual_norm_estimate(cfg.f_at, cfg.mesh);

    struct Block {
        MeanAccumulator acc;
        std::size_t violations = 0;
    };
    const ChunkPlan plan = ChunkPlan::make(cfg.N, kMaxChunks, kChunkSamples);
    std::vector<Block> blocks(plan.chunks());

    run_chunks(plan, cfg.threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        Block& block = blocks[chunk];
        std::vector<double> y(cfg.J);
        std::vector<double> a_mid(cfg.mesh.elements());
        std::vector<double> u(cfg.mesh.m);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 1; j <= cfg.J; ++j)
                y[j - 1] = gaussian_variate(cfg.seed, i, j);
            table.coefficient_at_midpoints(y, a_mid);
            const TridiagonalFactor factor(a_mid, cfg.mesh);
            factor.solve(load, u);

            double vn_sq = 0.0, prev = 0.0;
            for (int p = 0; p < cfg.mesh.m; ++p) {
                const double d = u[p] - prev;
                vn_sq += d * d;
                prev = u[p];
            }
            vn_sq = (vn_sq + prev * prev) * (cfg.mesh.m + 1);
            const double vn = std::sqrt(vn_sq);

            if (vn > fstar * std::exp(table.field_sup(y)))
                ++block.violations;
            block.acc.add(std::pow(vn, k));
        }
    });

    MomentRun run;
    MeanAccumulator total;
    for (const auto& block : blocks) {
        total.merge(block.acc);
        run.laxmilgram_violations += block.violations;
    }
    run.estimate = finalize(total, cfg.N);
    return run;
}

std::vector<TailPoint> tail_curve(const SampleConfig& cfg, std::span<const double> ts) {
    check_config(cfg);
    for (double t : ts)
        if (!(t >= 0.0))
            throw std::invalid_argument("thresholds must be nonnegative");
    const GridTable table(cfg.system, cfg.J, cfg.sup_grid);

    const ChunkPlan plan = ChunkPlan::make(cfg.N, kMaxChunks, kChunkSamples);
    std::vector<std::vector<std::size_t>> blocks(plan.chunks());
    run_chunks(plan, cfg.threads, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        auto& counts = blocks[chunk];
        counts.assign(ts.size(), 0);
        std::vector<double> y(cfg.J);
        for (std::size_t i = begin; i < end; ++i) {
            for (std::size_t j = 1; j <= cfg.J; ++j)
                y[j - 1] = gaussian_variate(cfg.seed, i, j);
            const double sup = table.sup(y);
            for (std::size_t s = 0; s < ts.size(); ++s)
                if (sup > ts[s])
                    ++counts[s];
        }
    });

    std::vector<std::size_t> counts(ts.size(), 0);
    for (const auto& block : blocks)
        for (std::size_t s = 0; s < ts.size(); ++s)
            counts[s] += block[s];

    std::vector<TailPoint> out(ts.size());
    const double nd = static_cast<double>(cfg.N);
    for (std::size_t s = 0; s < ts.size(); ++s) {
        const double p = static_cast<double>(counts[s]) / nd;
        out[s] = {ts[s], p, std::sqrt(std::max(0.0, p * (1.0 - p)) / nd), counts[s],
                  counts[s] < 10};
    }
    return out;
}

TailFit fit_tail_curve(std::span<const TailPoint> points) {
    CompensatedSum sx, sy, sxx, sxy;
    std::size_t used = 0;
    for (const TailPoint& pt : points) {
        if (pt.count == 0)
            continue;
        const double x = pt.t * pt.t;
        const double y = std::log(pt.p);
        sx.add(x);
        sy.add(y);
        sxx.add(x * x);
        sxy.add(x * y);
        ++used;
    }
    if (used < 2)
        throw std::invalid_argument("tail fit needs at least two nonzero points");
    const double nd = static_cast<double>(used);
    const double denom = nd * sxx.value() - sx.value() * sx.value();
    if (denom == 0.0)
        throw std::invalid_argument("tail fit needs distinct thresholds");
    const double slope = (nd * sxy.value() - sx.value() * sy.value()) / denom;
    const double intercept = (sy.value() - slope * sx.value()) / nd;
    return {slope, intercept, used};
}

} // namespace lognpce
