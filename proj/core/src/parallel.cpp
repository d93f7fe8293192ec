#include "cyclekit/parallel.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace cyclekit {

int worker_count() {
    if (const char* env = std::getenv("CYCLEKIT_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
        return 1;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for_chunks(std::size_t num_chunks,
                         const std::function<void(std::size_t)>& fn) {
    if (num_chunks == 0) return;
    std::size_t workers = static_cast<std::size_t>(worker_count());
    if (workers > num_chunks) workers = num_chunks;

    if (workers <= 1) {
        for (std::size_t c = 0; c < num_chunks; ++c) fn(c);
        return;
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto body = [&]() {
        for (;;) {
            std::size_t c = next.fetch_add(1);
            if (c >= num_chunks) return;
            try {
                fn(c);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();

    if (first_error) std::rethrow_exception(first_error);
}

void parallel_for_ranges(std::size_t n, std::size_t chunk_size,
                         const std::function<void(std::size_t, std::size_t,
                                                  std::size_t)>& fn) {
    if (n == 0) return;
    if (chunk_size == 0) chunk_size = 1;
    std::size_t num_chunks = (n + chunk_size - 1) / chunk_size;
    parallel_for_chunks(num_chunks, [&](std::size_t c) {
        std::size_t begin = c * chunk_size;
        std::size_t end = begin + chunk_size;
        if (end > n) end = n;
        fn(begin, end, c);
    });
}

}  // namespace cyclekit
