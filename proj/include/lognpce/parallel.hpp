#ifndef LOGNPCE_PARALLEL_HPP
#define LOGNPCE_PARALLEL_HPP

#include <cstddef>
#include <utility>

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace lognpce {

/// Fixed partition of [0, count) into chunks. Boundaries depend only on the
/// count, never on the thread count, so chunkwise reductions merged in chunk
/// order are bitwise independent of the parallel schedule.
struct ChunkPlan {
    std::size_t count = 0;
    std::size_t chunk_size = 1;

    static ChunkPlan make(std::size_t count, std::size_t max_chunks,
                          std::size_t min_chunk_size) {
        ChunkPlan plan;
        plan.count = count;
        if (count == 0)
            return plan;
        std::size_t size = (count + max_chunks - 1) / max_chunks;
        plan.chunk_size = std::max(size, min_chunk_size);
        return plan;
    }

    std::size_t chunks() const {
        return count == 0 ? 0 : (count + chunk_size - 1) / chunk_size;
    }
    std::pair<std::size_t, std::size_t> range(std::size_t c) const {
        const std::size_t begin = c * chunk_size;
        return {begin, std::min(begin + chunk_size, count)};
    }
};

inline int resolve_threads(int threads) {
    if (threads > 0)
        return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Runs work(chunk_index, begin, end) for every chunk, possibly concurrently.
/// The caller owns per-chunk result slots and merges them in chunk order.
inline void run_chunks(const ChunkPlan& plan, int threads,
                       const std::function<void(std::size_t, std::size_t, std::size_t)>& work) {
    const std::size_t n_chunks = plan.chunks();
    if (n_chunks == 0)
        return;
    const int workers = std::min<int>(resolve_threads(threads),
                                      static_cast<int>(n_chunks));
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) {
            const auto [b, e] = plan.range(c);
            work(c, b, e);
        }
        return;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&] {
        while (!failed.load(std::memory_order_relaxed)) {
            const std::size_t c = next.fetch_add(1);
            if (c >= n_chunks)
                return;
            try {
                const auto [b, e] = plan.range(c);
                work(c, b, e);
            } catch (...) {
                std::scoped_lock lock(error_mutex);
                if (!error)
                    error = std::current_exception();
                failed.store(true, std::memory_order_relaxed);
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
        pool.emplace_back(body);
    for (auto& th : pool)
        th.join();
    if (error)
        std::rethrow_exception(error);
}

} // namespace lognpce

#endif
