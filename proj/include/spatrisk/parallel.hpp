#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <thread>
#include <vector>

namespace spatrisk {

/// Worker count: RISK_THREADS overrides hardware concurrency.
inline unsigned worker_count(std::size_t jobs) {
    unsigned t = 0;
    if (const char* env = std::getenv("RISK_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) t = static_cast<unsigned>(v);
    }
    if (t == 0) t = std::thread::hardware_concurrency();
    if (t == 0) t = 1;
    if (t > jobs) t = static_cast<unsigned>(jobs);
    return t;
}

/// Run body(lo, hi) over a static partition of [0, n). Each chunk owns its
/// scratch state; outputs keyed by global index stay deterministic.
template <class F>
void parallel_chunks(std::size_t n, F&& body) {
    if (n == 0) return;
    const unsigned workers = worker_count(n);
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi]() {
            try {
                body(lo, hi);
            } catch (...) {
                if (!failed.exchange(true)) error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

/// Run body(i) for i in [0, n). Work items must write only to their own
/// index so results do not depend on scheduling or worker count.
template <class F>
void parallel_for(std::size_t n, F&& body) {
    if (n == 0) return;
    const unsigned workers = worker_count(n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n || failed.load()) return;
                try {
                    body(i);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace spatrisk
