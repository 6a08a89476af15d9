#pragma once

#include <algorithm>
#include <exception>
#include <thread>
#include <vector>

namespace curvcone::detail {

// Runs fn(i) for i in [0, count) on up to `workers` threads. Work item i is
// always handled the same way regardless of the thread that runs it, so any
// result indexed by i is independent of the worker count.
template <class Fn>
void parallel_for(int count, int workers, Fn&& fn) {
    workers = std::max(1, std::min(workers, count));
    if (workers == 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (int i = w; i < count; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace curvcone::detail
