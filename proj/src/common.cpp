#include "spikeplast/common.hpp"

#include <algorithm>
#include <thread>
#include <vector>

namespace spikeplast {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    std::size_t workers = threads <= 0 ? std::max(1u, std::thread::hardware_concurrency())
                                       : static_cast<std::size_t>(threads);
    workers = std::min(workers, n);
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end] { fn(begin, end); });
    }
    for (auto& t : pool) t.join();
}

} // namespace spikeplast
