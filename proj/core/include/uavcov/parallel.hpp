// Copyright (c) 2026 the uavcov authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace uavcov {

inline int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Runs body(i) for i in [0, n) on up to `jobs` threads.
///
/// Work is handed out in fixed-size blocks; callers must write results keyed
/// by index so the outcome is independent of scheduling.
template <class F>
void parallel_for(std::size_t n, int jobs, F&& body) {
    const int workers = std::min<std::size_t>(resolve_jobs(jobs), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::mutex err_mutex;
    std::exception_ptr first_error;
    const std::size_t block = (n + workers - 1) / workers;
    for (int w = 0; w < workers; ++w) {
        const std::size_t lo = w * block;
        const std::size_t hi = std::min(n, lo + block);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            try {
                for (std::size_t i = lo; i < hi; ++i) body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

}  // namespace uavcov
