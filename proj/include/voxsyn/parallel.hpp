#pragma once

#include <algorithm>
#include <cstdint>
#include <thread>
#include <utility>
#include <vector>

namespace voxsyn {

inline int clamp_threads(int requested) {
    if (requested < 1) return 1;
    return std::min(requested, 64);
}

// Chunk boundaries for [0, n) split across `threads` workers. Depends only on
// (n, threads), which is what lets threaded runs reproduce single-threaded
// output: callers gather per-chunk results and combine them in chunk order.
inline std::vector<std::pair<std::int64_t, std::int64_t>> chunk_ranges(std::int64_t n,
                                                                       int threads) {
    threads = clamp_threads(threads);
    std::vector<std::pair<std::int64_t, std::int64_t>> ranges;
    if (n <= 0) return ranges;
    if (threads == 1 || n < 2 * threads) {
        ranges.emplace_back(0, n);
        return ranges;
    }
    const std::int64_t chunk = (n + threads - 1) / threads;
    for (std::int64_t begin = 0; begin < n; begin += chunk)
        ranges.emplace_back(begin, std::min(n, begin + chunk));
    return ranges;
}

// Runs fn(chunk_index, begin, end) over the chunk_ranges of [0, n).
template <typename Fn>
void parallel_for_chunks(std::int64_t n, int threads, Fn&& fn) {
    const auto ranges = chunk_ranges(n, threads);
    if (ranges.empty()) return;
    if (ranges.size() == 1) {
        fn(std::size_t{0}, ranges[0].first, ranges[0].second);
        return;
    }
    std::vector<std::thread> workers;
    workers.reserve(ranges.size());
    for (std::size_t t = 0; t < ranges.size(); ++t)
        workers.emplace_back([&fn, t, &ranges] { fn(t, ranges[t].first, ranges[t].second); });
    for (auto& w : workers) w.join();
}

// Runs fn(begin, end) over contiguous chunks of [0, n). Callers are
// responsible for making per-element work independent of the chunking so
// results match the threads == 1 run.
template <typename Fn>
void parallel_for(std::int64_t n, int threads, Fn&& fn) {
    parallel_for_chunks(n, threads,
                        [&fn](std::size_t, std::int64_t begin, std::int64_t end) {
                            fn(begin, end);
                        });
}

} // namespace voxsyn
