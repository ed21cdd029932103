#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace zn {

// Static block partition of [0, n) across `threads` workers. Each index is
// processed by exactly one worker and the work inside a block is sequential,
// so results never depend on the thread count (all tasks draw their
// randomness from counter-based streams keyed by the task index, not by
// worker identity). The first exception thrown by any worker is rethrown.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t, std::size_t)>& block_fn) {
    if (n == 0) return;
    unsigned hw = std::max(1u, threads);
    hw = static_cast<unsigned>(std::min<std::size_t>(hw, n));
    if (hw == 1) {
        block_fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const std::size_t chunk = (n + hw - 1) / hw;
    for (unsigned t = 0; t < hw; ++t) {
        const std::size_t lo = static_cast<std::size_t>(t) * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                block_fn(lo, hi);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace zn
