#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace wqed {

// Philox4x32-10 counter-based generator (Salmon, Moraes, Dror, Shaw, SC'11).
//
// Every 128-bit output block is a pure function of (seed, stream, block index), so any
// draw can be regenerated without replaying the stream.  Streams are used one per
// trajectory: stream = trajectory id, seed = master seed.  This is what makes ensemble
// output independent of scheduling: trajectory i consumes draws
// uniform(seed, i, 0), uniform(seed, i, 1), ... no matter which thread runs it.
//
// Key schedule: key = (lo32(seed), hi32(seed)); per-round Weyl increments
// 0x9E3779B9 / 0xBB67AE85. Counter words: (lo32(block), hi32(block),
// lo32(stream), hi32(stream)).  Verified against the published Random123
// known-answer vectors in tests.
struct Philox4x32 {
    static std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t stream,
                                              std::uint64_t index) {
        std::uint32_t c0 = static_cast<std::uint32_t>(index);
        std::uint32_t c1 = static_cast<std::uint32_t>(index >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream >> 32);
        std::uint32_t k0 = static_cast<std::uint32_t>(seed);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
        for (int round = 0; round < 10; ++round) {
            if (round > 0) {
                k0 += 0x9E3779B9u;
                k1 += 0xBB67AE85u;
            }
            const std::uint64_t p0 = 0xD2511F53ull * c0;
            const std::uint64_t p1 = 0xCD9E8D57ull * c2;
            const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
            const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
            c0 = hi1 ^ c1 ^ k0;
            c1 = lo1;
            c2 = hi0 ^ c3 ^ k1;
            c3 = lo0;
        }
        return {c0, c1, c2, c3};
    }
};

// Buffered view of one Philox stream.  uniform() consumes 64 bits, so each block
// yields two draws; draw k lives in block k/2 regardless of history.
class RngStream {
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() {
        if (pos_ == 2) {
            const auto b = Philox4x32::block(seed_, stream_, index_++);
            buf_[0] = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
            buf_[1] = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
            pos_ = 0;
        }
        return buf_[pos_++];
    }

    // Uniform on [0, 1) with 53 random mantissa bits.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Inverse-CDF exponential draw; rate > 0.  -log1p(-u) keeps precision near u = 0.
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t index_ = 0;
    std::array<std::uint64_t, 2> buf_{};
    int pos_ = 2;
};

}  // namespace wqed
