#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace dmoments {

/// Runs task(i) for i in [0, count) on up to `threads` workers.
/// Tasks are claimed dynamically; callers make results schedule-independent
/// by writing into per-index slots. The first exception is rethrown.
template <typename Task>
void parallel_for(std::uint64_t count, unsigned threads, Task&& task)
{
    const auto workers = static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, threads), count));
    if (workers <= 1) {
        for (std::uint64_t i = 0; i < count; ++i) {
            task(i);
        }
        return;
    }
    std::atomic<std::uint64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr failure;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::uint64_t i = next.fetch_add(1);
                if (i >= count || failed.load()) {
                    return;
                }
                try {
                    task(i);
                } catch (...) {
                    if (!failed.exchange(true)) {
                        failure = std::current_exception();
                    }
                    return;
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

}  // namespace dmoments
