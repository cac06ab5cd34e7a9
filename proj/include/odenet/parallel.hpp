#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace odenet {

// Runs body(i) for i in [0, n) on up to `threads` plain std::threads, chunked
// contiguously. Bodies must write only to their own preallocated slots; any
// reduction happens sequentially after the join, so results are independent
// of the thread count.
inline void parallel_for(std::size_t n, int threads,
                         const std::function<void(std::size_t)>& body) {
    if (n == 0) return;
    std::size_t workers = threads > 1 ? std::min<std::size_t>(threads, n) : 1;
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t lo = w * chunk;
        std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &body] {
            for (std::size_t i = lo; i < hi; ++i) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace odenet
