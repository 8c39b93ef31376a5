#pragma once

// Order-preserving parallel map for independent grid points.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <type_traits>
#include <vector>

namespace plap {

/// Number of worker threads used by ordered_map when none is requested.
inline unsigned default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1u : hw;
}

/// Applies fn to every input and returns the results in input order,
/// whatever the completion order. The first exception thrown by any call is
/// rethrown after all workers have stopped.
template <class In, class Fn>
auto ordered_map(const std::vector<In>& inputs, Fn fn, unsigned workers = 0)
    -> std::vector<std::invoke_result_t<Fn&, const In&>> {
    using Out = std::invoke_result_t<Fn&, const In&>;
    std::vector<Out> out(inputs.size());
    if (workers == 0) {
        workers = default_workers();
    }
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, inputs.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            out[i] = fn(inputs[i]);
        }
        return out;
    }

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_lock;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= inputs.size() || failed.load()) {
                return;
            }
            try {
                out[i] = fn(inputs[i]);
            } catch (...) {
                const std::lock_guard<std::mutex> guard(error_lock);
                if (!first_error) {
                    first_error = std::current_exception();
                }
                failed.store(true);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned k = 0; k < workers; ++k) {
        pool.emplace_back(worker);
    }
    for (std::thread& th : pool) {
        th.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
    return out;
}

}  // namespace plap
