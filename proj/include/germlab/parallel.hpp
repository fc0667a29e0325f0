#pragma once

// Deterministic parallel-for. Work is split into fixed-grain chunks that
// threads claim atomically; every item writes only to its own output slot
// and any reduction happens afterwards in index order, so results do not
// depend on the thread count. Set GERMLAB_THREADS to override.

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace germlab {

inline int worker_count() {
    if (const char* env = std::getenv("GERMLAB_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw > 8 ? 8 : hw);
}

template <typename Fn>
void parallel_for(int n, Fn&& fn, int grain = 64) {
    if (n <= 0) return;
    const int threads = worker_count();
    if (threads <= 1 || n <= grain) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        while (true) {
            const int begin = next.fetch_add(grain);
            if (begin >= n) return;
            const int end = begin + grain < n ? begin + grain : n;
            for (int i = begin; i < end; ++i) fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int spawn = threads - 1 < (n + grain - 1) / grain ? threads - 1
                                                            : (n + grain - 1) / grain;
    pool.reserve(spawn);
    for (int t = 0; t < spawn; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
}

}  // namespace germlab
