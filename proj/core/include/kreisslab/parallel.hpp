#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace kreisslab {

// Worker cap: KREISSLAB_THREADS if set, else hardware concurrency.
std::size_t thread_count();

namespace detail {
inline thread_local bool in_parallel_region = false;
}

// Runs f(i) for i in [0, n). Callers write results into slot i and reduce
// afterwards in index order, so outcomes do not depend on scheduling.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
    const std::size_t workers = detail::in_parallel_region ? 1 : std::min(thread_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto body = [&] {
        detail::in_parallel_region = true;
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) {
                detail::in_parallel_region = false;
                return;
            }
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 0; w + 1 < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

} // namespace kreisslab
