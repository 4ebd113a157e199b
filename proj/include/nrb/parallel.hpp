#pragma once

// Minimal deterministic work distributor: indices are striped across worker
// threads; results must be written to per-index slots so merge order never
// depends on scheduling. Exceptions propagate (first thrown wins).

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

#include "nrb/errors.hpp"

namespace nrb {

inline int resolve_thread_count(int requested) {
    if (requested < 0) throw InvalidArgument("resolve_thread_count: negative thread count");
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

inline void parallel_for(size_t n, int n_threads, const std::function<void(size_t)>& body) {
    int workers = resolve_thread_count(n_threads);
    if (workers <= 1 || n <= 1) {
        for (size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::mutex err_mutex;
    std::exception_ptr first_error;
    auto run = [&]() {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace nrb
