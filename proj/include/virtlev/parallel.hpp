#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace virtlev {

/// Worker count from VIRTLEV_THREADS, defaulting to 1. Invalid values are
/// ignored.
inline unsigned default_thread_count() {
    if (const char* env = std::getenv("VIRTLEV_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 1024) return unsigned(v);
    }
    return 1;
}

/// Calls body(i) for i in [0, n) on up to `threads` workers. Each index runs
/// exactly once; exceptions are captured per index and returned in order, so
/// the outcome does not depend on scheduling.
template <typename Body>
std::vector<std::exception_ptr> parallel_for(std::size_t n, unsigned threads, Body&& body) {
    std::vector<std::exception_ptr> errors(n);
    const auto run = [&](std::size_t i) {
        try {
            body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    const unsigned workers = unsigned(std::min<std::size_t>(std::max(1u, threads), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) run(i);
        return errors;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) run(i);
        });
    for (auto& t : pool) t.join();
    return errors;
}

} // namespace virtlev
