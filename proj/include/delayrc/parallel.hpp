#pragma once

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace delayrc {

/// Runs fn(i) for i in [0, n) on up to `jobs` worker threads. Each task must
/// write only to its own output slot; the task-to-slot mapping is fixed, so
/// results do not depend on the worker count or scheduling order. The first
/// exception thrown by a task is rethrown after all workers finish.
inline void parallel_for(long n, int jobs, const std::function<void(long)>& fn) {
    if (n <= 0) return;
    if (jobs <= 1 || n == 1) {
        for (long i = 0; i < n; ++i) fn(i);
        return;
    }
    const int workers = static_cast<int>(std::min<long>(jobs, n));
    std::atomic<long> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const long i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace delayrc
