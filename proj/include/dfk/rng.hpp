#pragma once

#include <cstdint>
#include <span>

namespace dfk {

/// xoshiro256++ with splitmix64 seeding.
///
/// Fully specified generator so that sampling, shuffling, and training are
/// bit-reproducible across platforms and standard libraries. Stream
/// discipline: every consumer derives its own generator via
/// `Rng(seed, stream)` where `stream` is a fixed per-purpose constant, so
/// adding a consumer never perturbs existing streams.
class Rng {
  public:
    explicit Rng(uint64_t seed, uint64_t stream = 0) {
        uint64_t x = seed ^ (0x9e3779b97f4a7c15ull * (stream + 1));
        for (auto& word : state_) word = splitmix64(x);
    }

    uint64_t next_u64() {
        const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n); n > 0. Modulo bias is negligible for n << 2^64.
    uint64_t uniform_index(uint64_t n) { return next_u64() % n; }

    /// Fisher-Yates shuffle, deterministic for a fixed generator state.
    template <typename T>
    void shuffle(std::span<T> items) {
        for (size_t i = items.size(); i > 1; --i) {
            size_t j = static_cast<size_t>(uniform_index(i));
            T tmp = items[i - 1];
            items[i - 1] = items[j];
            items[j] = tmp;
        }
    }

  private:
    static uint64_t rotl(uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

    static uint64_t splitmix64(uint64_t& x) {
        uint64_t z = (x += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    uint64_t state_[4];
};

/// Fixed stream ids (see Rng stream discipline).
namespace rng_stream {
inline constexpr uint64_t kPoissonDisk = 1;
inline constexpr uint64_t kBatchShuffle = 2;
inline constexpr uint64_t kFieldgenNoise = 3;
inline constexpr uint64_t kEvalPoints = 4;
}  // namespace rng_stream

}  // namespace dfk
