#pragma once

#include <atomic>
#include <functional>
#include <thread>
#include <vector>

namespace itinerant {

// Runs body(i) for i in [0, n). Results must be written to pre-sized,
// index-disjoint storage so the outcome is independent of thread count.
inline void parallel_for(int n, int n_threads,
                         const std::function<void(int)>& body) {
    if (n_threads <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i)
            body(i);
        return;
    }
    std::vector<std::thread> workers;
    std::atomic<int> next{0};
    const int count = std::min(n_threads, n);
    workers.reserve(count);
    for (int w = 0; w < count; ++w) {
        workers.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                body(i);
        });
    }
    for (auto& t : workers)
        t.join();
}

} // namespace itinerant
