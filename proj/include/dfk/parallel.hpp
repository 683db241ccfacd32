#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace dfk {

/// Number of fixed work chunks used by every parallel reduction. Chunk
/// boundaries depend only on the item count, and chunk results are combined
/// in chunk-index order, so results are bitwise independent of thread count.
inline constexpr size_t kReductionChunks = 64;

struct ChunkRange {
    size_t begin, end, index;
};

inline std::vector<ChunkRange> make_chunks(size_t n, size_t chunks = kReductionChunks) {
    std::vector<ChunkRange> out;
    if (n == 0) return out;
    chunks = std::min(chunks, n);
    const size_t base = n / chunks;
    const size_t rem = n % chunks;
    size_t begin = 0;
    for (size_t c = 0; c < chunks; ++c) {
        const size_t len = base + (c < rem ? 1 : 0);
        out.push_back({begin, begin + len, c});
        begin += len;
    }
    return out;
}

/// Runs fn(range) for every chunk, possibly in parallel. Each chunk must
/// accumulate into its own slot; the caller reduces slots in index order.
template <typename Fn>
void for_each_chunk(size_t n, Fn&& fn) {
    const auto chunks = make_chunks(n);
    if (chunks.empty()) return;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw <= 1 || chunks.size() == 1) {
        for (const auto& c : chunks) fn(c);
        return;
    }
    const size_t workers = std::min<size_t>(hw, chunks.size());
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (size_t c = w; c < chunks.size(); c += workers) fn(chunks[c]);
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace dfk
