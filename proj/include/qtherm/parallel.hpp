// parallel.hpp — bounded-worker index parallelism with deterministic
// result placement.

#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace qtherm::par {

inline unsigned default_workers() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 2;
}

// Run fn(i) for i in [0, count) on up to `workers` threads. Exceptions are
// captured and the first one rethrown after all workers join.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn,
                         unsigned workers = 0) {
    if (workers == 0) workers = default_workers();
    if (count == 0) return;
    if (workers <= 1 || count == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(std::min<std::size_t>(workers, count));
    const std::size_t n_threads = errors.size();
    for (std::size_t w = 0; w < n_threads; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace qtherm::par
