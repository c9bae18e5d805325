#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace declab {

// Worker count: explicit > DECOUPLING_LAB_WORKERS > hardware.
inline int resolve_workers(int configured) {
    if (const char* env = std::getenv("DECOUPLING_LAB_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    if (configured > 0) return configured;
    unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// Runs f(chunk_index) for every chunk.  The chunk decomposition is the
// caller's and does not depend on the worker count, so per-chunk outputs
// merged in index order give bit-identical results for any worker count.
inline void parallel_for_chunks(size_t nchunks, int workers,
                                const std::function<void(size_t)>& f) {
    if (nchunks == 0) return;
    if (workers <= 1 || nchunks == 1) {
        for (size_t i = 0; i < nchunks; ++i) f(i);
        return;
    }
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (;;) {
            size_t i = next.fetch_add(1);
            if (i >= nchunks) break;
            f(i);
        }
    };
    size_t nthreads = std::min<size_t>(static_cast<size_t>(workers), nchunks);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

}  // namespace declab
