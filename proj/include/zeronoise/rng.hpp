#pragma once

#include <array>
#include <cstdint>

namespace zn {

// Counter-based random number generator: Philox4x32-10 (Salmon, Moraes, Dror,
// Shaw; SC 2011). The generator is a pure function of (key, counter), so any
// draw can be reproduced on any platform from the (seed, stream, cursor)
// triple alone, orbits can be resumed mid-stream, and parallel tasks get
// independent streams without shared state.
//
// Layout used here:
//   key     = 64-bit seed split into two 32-bit words
//   counter = {block_lo, block_hi, stream_lo, stream_hi}
// Each 128-bit block yields four 32-bit words; draws consume words in order
// and bump the 64-bit block index when the block is exhausted.

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         std::array<std::uint32_t, 2>& key) {
    constexpr std::uint32_t M0 = 0xD2511F53u;
    constexpr std::uint32_t M1 = 0xCD9E8D57u;
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += 0x9E3779B9u;  // Weyl constants from the published algorithm
    key[1] += 0xBB67AE85u;
}

inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    for (int r = 0; r < 10; ++r) philox_round(ctr, key);
    return ctr;
}

}  // namespace detail

// Resumable position inside a stream: block index plus word offset (0..3).
struct RngCursor {
    std::uint64_t block = 0;
    int word = 0;

    bool operator==(const RngCursor&) const = default;
};

class Rng {
  public:
    Rng(std::uint64_t seed, std::uint64_t stream)
        : seed_(seed), stream_(stream) {}

    Rng(std::uint64_t seed, std::uint64_t stream, RngCursor cursor)
        : seed_(seed), stream_(stream), cursor_(cursor) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    RngCursor cursor() const { return cursor_; }

    std::uint32_t next_u32() {
        if (!cache_valid_ || cached_block_ != cursor_.block) refill();
        const std::uint32_t out = block_[static_cast<std::size_t>(cursor_.word)];
        advance();
        return out;
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        const std::uint64_t lo = next_u32();
        return (hi << 32) | lo;
    }

    // Uniform double in [0,1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  private:
    void refill() {
        const std::array<std::uint32_t, 4> ctr = {
            static_cast<std::uint32_t>(cursor_.block),
            static_cast<std::uint32_t>(cursor_.block >> 32),
            static_cast<std::uint32_t>(stream_),
            static_cast<std::uint32_t>(stream_ >> 32)};
        const std::array<std::uint32_t, 2> key = {
            static_cast<std::uint32_t>(seed_),
            static_cast<std::uint32_t>(seed_ >> 32)};
        block_ = detail::philox4x32_10(ctr, key);
        cached_block_ = cursor_.block;
        cache_valid_ = true;
    }

    void advance() {
        if (++cursor_.word == 4) {
            cursor_.word = 0;
            ++cursor_.block;
        }
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    RngCursor cursor_{};
    std::array<std::uint32_t, 4> block_{};
    std::uint64_t cached_block_ = 0;
    bool cache_valid_ = false;
};

}  // namespace zn
