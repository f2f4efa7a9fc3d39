#pragma once

#include <cstddef>
#include <exception>
#include <vector>

#include <omp.h>

namespace itosim {

/// Serial is the reference implementation kept for tests and benchmarks.
enum class Execution { Serial, OpenMP };

/// Calls f(i) for i in [0, n). Exceptions are collected per index and the one
/// from the lowest index is rethrown after all work finishes, so the outcome
/// does not depend on scheduling.
template <class F>
void for_each_index(std::size_t n, Execution exec, int workers, F&& f) {
    std::vector<std::exception_ptr> errors(n);
    if (exec == Execution::Serial || workers <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) {
            try {
                f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
        for (long long i = 0; i < count; ++i) {
            try {
                f(static_cast<std::size_t>(i));
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    }
    for (const std::exception_ptr& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace itosim
