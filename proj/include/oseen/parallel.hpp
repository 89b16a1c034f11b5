#ifndef OSEEN_PARALLEL_HPP
#define OSEEN_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace oseen {

// Index-parallel loop over a fixed task count. Results must be written to
// preallocated slots keyed by index so that reductions are deterministic
// and independent of the worker count. The first exception thrown by a task
// is rethrown on the calling thread after all workers drain.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&]() {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(count);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    int n = std::min<int>(workers, static_cast<int>(count));
    pool.reserve(n);
    for (int t = 0; t < n; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// Cooperative interrupt flag (set by the CLI's SIGINT handler); long sweeps
/// poll it between tasks so completed shards stay valid.
std::atomic<bool>& interrupt_flag();

}  // namespace oseen

#endif
