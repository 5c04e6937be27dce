#pragma once
// Replicate-parallel map: results are merged by replicate index, so output is
// identical for any worker count.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <thread>
#include <vector>

namespace reglab {

template <class T>
std::vector<T> run_replicates(std::size_t n, std::size_t workers,
                              const std::function<T(std::size_t)>& fn) {
    if (workers == 0) throw std::invalid_argument("run_replicates: workers must be >= 1");
    std::vector<T> out(n);
    if (workers == 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w]() {
            try {
                for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return out;
}

}  // namespace reglab
