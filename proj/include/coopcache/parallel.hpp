#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace coopcache {

/// Worker count for task sharding: hardware concurrency capped by the
/// COOPCACHE_THREADS environment variable and by the task count itself.
inline std::size_t resolve_thread_cap(std::size_t task_count) {
    std::size_t n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("COOPCACHE_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) {
            n = std::min<std::size_t>(n, static_cast<std::size_t>(v));
        }
    }
    return std::max<std::size_t>(1, std::min(n, task_count));
}

/// Runs fn(i) for i in [0, task_count) across worker threads. Tasks must be
/// independent; results keyed by index stay deterministic regardless of the
/// worker count.
inline void parallel_for_index(std::size_t task_count,
                               const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = resolve_thread_cap(task_count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < task_count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t t = 0; t < workers; ++t) {
        pool.emplace_back([=, &fn] {
            for (std::size_t i = t; i < task_count; i += workers) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace coopcache
