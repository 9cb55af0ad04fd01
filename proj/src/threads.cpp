#include "frbm/threads.hpp"

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace frbm {
namespace {

int initial_cap() {
    if (const char* env = std::getenv("FRBM_THREADS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

std::atomic<int>& cap_slot() {
    static std::atomic<int> cap{initial_cap()};
    return cap;
}

}  // namespace

int thread_cap() { return cap_slot().load(std::memory_order_relaxed); }

void set_thread_cap(int n) { cap_slot().store(n < 1 ? 1 : n, std::memory_order_relaxed); }

void parallel_blocks(std::int64_t n_blocks, const std::function<void(std::int64_t)>& fn) {
    if (n_blocks <= 0) return;
    int workers = thread_cap();
    if (workers > n_blocks) workers = static_cast<int>(n_blocks);
    if (workers <= 1) {
        for (std::int64_t b = 0; b < n_blocks; ++b) fn(b);
        return;
    }
    std::atomic<std::int64_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                std::int64_t b = next.fetch_add(1, std::memory_order_relaxed);
                if (b >= n_blocks) return;
                fn(b);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace frbm
