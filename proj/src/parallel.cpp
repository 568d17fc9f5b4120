#include "korpusmap/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace korpusmap {

namespace {

std::atomic<std::size_t> override_workers{0};

std::size_t default_workers() {
    std::size_t n = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("KORPUSMAP_THREADS")) {
        try {
            const long cap = std::stol(env);
            if (cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
        } catch (const std::exception&) {
        }
    }
    return n;
}

}  // namespace

std::size_t worker_count() {
    const std::size_t forced = override_workers.load();
    return forced > 0 ? forced : default_workers();
}

void set_worker_count(std::size_t n) { override_workers.store(n); }

void parallel_for_blocks(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body) {
    constexpr std::size_t kMinBlock = 64;
    const std::size_t workers = std::min(worker_count(), (n + kMinBlock - 1) / kMinBlock);
    if (workers <= 1) {
        if (n > 0) body(0, n);
        return;
    }
    const std::size_t block = (n + workers - 1) / workers;
    std::vector<std::jthread> threads;
    threads.reserve(workers - 1);
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t begin = w * block;
        const std::size_t end = std::min(n, begin + block);
        if (begin < end) threads.emplace_back([&body, begin, end] { body(begin, end); });
    }
    body(0, std::min(n, block));
}

}  // namespace korpusmap
