#include "p2ad/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace p2ad {

int effective_thread_count() {
    if (const char* env = std::getenv("P2AD_THREADS")) {
        try {
            const int n = std::stoi(env);
            return n >= 1 ? n : 1;
        } catch (...) {
            return 1;
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw >= 1 ? static_cast<int>(hw) : 1;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    if (n == 0) return;
    const std::size_t threads =
        std::min<std::size_t>(static_cast<std::size_t>(effective_thread_count()), n);
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    // Contiguous blocks; each worker touches only its own indices, so the
    // result is identical to the serial loop whenever fn writes only to
    // slot i.
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::size_t base = n / threads, rem = n % threads;
    std::size_t start = 0;
    std::exception_ptr error;
    std::mutex error_mu;
    for (std::size_t t = 0; t < threads; ++t) {
        const std::size_t count = base + (t < rem ? 1 : 0);
        const std::size_t begin = start, end = start + count;
        start = end;
        pool.emplace_back([&, begin, end] {
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace p2ad
