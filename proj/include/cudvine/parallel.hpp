#pragma once

// Chunked parallel loop for independent work items (replications, per-series
// fits, per-day forecasts). Exceptions in workers are captured and rethrown.

#include <atomic>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace cudvine {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

template <class Fn>
void parallel_for(int n, int threads, Fn&& fn) {
    threads = std::min(resolve_threads(threads), n > 0 ? n : 1);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mtx;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mtx);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace cudvine
