#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sgalab {

// Evaluates task(i) for i in [0, count) on `threads` workers and returns the
// results in index order. Each task must own its randomness (derive it from i),
// which makes the output independent of the thread count.
template <typename Task>
auto run_indexed(std::size_t count, unsigned threads, Task&& task) -> std::vector<decltype(task(std::size_t{}))>
{
    using Result = decltype(task(std::size_t{}));
    std::vector<Result> results(count);
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) {
            results[i] = task(i);
        }
        return results;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    results[i] = task(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                    next = count;
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
    return results;
}

} // namespace sgalab
