#ifndef CACHE3D_PARALLEL_HPP
#define CACHE3D_PARALLEL_HPP

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace cache3d {

// Runs fn(i) for i in [0, n). Each index writes only its own slot, so the
// result is identical regardless of thread count; callers reduce the slots
// in index order afterwards. threads <= 1 runs inline.
template <typename Fn>
void parallel_for_indexed(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::size_t count = static_cast<std::size_t>(threads);
    if (count > n) count = n;
    std::vector<std::thread> pool;
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace cache3d

#endif  // CACHE3D_PARALLEL_HPP
