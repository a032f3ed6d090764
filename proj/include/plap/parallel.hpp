// Fork-join helper for multistarts and region-diagram columns. Tasks are
// indexed; callers collect results per index, so scheduling order never
// affects output.
#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace plap {

inline int effective_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

template <class Fn>
inline void parallel_for_indexed(int count, int threads, Fn&& fn) {
    threads = std::min(effective_threads(threads), count > 0 ? count : 1);
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const int i = next.fetch_add(1);
                if (i >= count) return;
                fn(i);
            }
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace plap
