#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace seamtrace {

/// Runs fn(0..n-1) across up to `jobs` threads in contiguous blocks.
/// The first exception thrown by any worker is rethrown after all join.
template <typename Fn>
void parallel_for(size_t n, int jobs, Fn&& fn) {
    const size_t workers = std::min<size_t>(n, static_cast<size_t>(std::max(jobs, 1)));
    if (workers <= 1) {
        for (size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            const size_t begin = n * w / workers;
            const size_t end = n * (w + 1) / workers;
            try {
                for (size_t k = begin; k < end; ++k) fn(k);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace seamtrace
