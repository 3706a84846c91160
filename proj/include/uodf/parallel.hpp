#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace uodf {

// Worker count: min(hardware, UODF_THREADS) with a floor of 1.
inline unsigned worker_count() {
    unsigned n = std::max(1u, std::thread::hardware_concurrency());
    if (const char* env = std::getenv("UODF_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

// Runs fn(i) for i in [begin, end). Work is handed out in fixed-size chunks
// through an atomic cursor, so results written to disjoint slots are
// deterministic regardless of scheduling.
inline void parallel_for(std::size_t begin, std::size_t end,
                         const std::function<void(std::size_t)>& fn,
                         std::size_t chunk = 64) {
    const std::size_t n = end > begin ? end - begin : 0;
    unsigned workers = worker_count();
    if (n == 0) return;
    if (workers <= 1 || n <= chunk) {
        for (std::size_t i = begin; i < end; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> cursor{begin};
    auto body = [&] {
        for (;;) {
            std::size_t i0 = cursor.fetch_add(chunk);
            if (i0 >= end) break;
            std::size_t i1 = std::min(end, i0 + chunk);
            for (std::size_t i = i0; i < i1; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers - 1);
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(body);
    body();
    for (auto& th : pool) th.join();
}

// Parallel map-reduce with a deterministic combine order: the index range is
// cut into fixed blocks, each block reduced independently, and the block
// results folded sequentially. The outcome does not depend on thread count.
template <typename T, typename Map, typename Fold>
T parallel_reduce(std::size_t begin, std::size_t end, T init, Map map_block, Fold fold,
                  std::size_t block = 1024) {
    const std::size_t n = end > begin ? end - begin : 0;
    if (n == 0) return init;
    const std::size_t nblocks = (n + block - 1) / block;
    std::vector<T> partial(nblocks, init);
    parallel_for(0, nblocks, [&](std::size_t b) {
        std::size_t i0 = begin + b * block;
        std::size_t i1 = std::min(end, i0 + block);
        partial[b] = map_block(i0, i1);
    }, 1);
    T acc = init;
    for (const T& p : partial) acc = fold(acc, p);
    return acc;
}

} // namespace uodf
