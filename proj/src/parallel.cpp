#include "surropt/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>

namespace surropt {

std::size_t worker_count()
{
    if (const char* env = std::getenv("SURROPT_THREADS")) {
        try {
            const long v = std::stol(env);
            if (v > 0) return static_cast<std::size_t>(v);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<std::exception_ptr> parallel_for(std::size_t n, const std::function<void(std::size_t)>& body)
{
    std::vector<std::exception_ptr> errors(n);
    const std::size_t workers = std::min(worker_count(), n);
    auto run_one = [&](std::size_t i) {
        try {
            body(i);
        } catch (...) {
            errors[i] = std::current_exception();
        }
    };
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) run_one(i);
        return errors;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) run_one(i);
        });
    }
    for (auto& t : pool) t.join();
    return errors;
}

void parallel_for_all(std::size_t n, const std::function<void(std::size_t)>& body)
{
    for (const auto& e : parallel_for(n, body)) {
        if (e) std::rethrow_exception(e);
    }
}

} // namespace surropt
