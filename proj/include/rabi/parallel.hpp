#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rabi {

// Number of worker threads used by parallel_for when callers pass 0.
inline std::atomic<unsigned>& default_thread_count()
{
    static std::atomic<unsigned> count{1};
    return count;
}

// Runs body(i) for i in [0, n). Each index is handled exactly once and writes
// only its own output slot, so results do not depend on the thread count.
template <class Body>
void parallel_for(std::size_t n, Body&& body, unsigned threads = 0)
{
    if (threads == 0)
        threads = default_thread_count().load();
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                }
            }
        });
    pool.clear();
    if (error)
        std::rethrow_exception(error);
}

} // namespace rabi
