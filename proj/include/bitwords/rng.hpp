#pragma once

#include <array>
#include <cstdint>

namespace bitwords {

// Counter-based stream: the u-th variate is a pure function of (seed, stream_id, u),
// independent of call order and thread count. Philox 4x64 with 10 rounds,
// key = (seed, stream_id), counter = (1 + u/4, 0, 0, 0), lane = u % 4; the
// pre-incremented counter makes the variate order bit-identical to the numpy
// Philox stream keyed the same way.
struct RngStream {
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    // Derived stream for sub-task i (one level deep; do not nest further).
    RngStream child(std::uint64_t i) const {
        return RngStream{seed, stream_id ^ (0x9E3779B97F4A7C15ull * (i + 1))};
    }
};

std::array<std::uint64_t, 4> philox_block(std::uint64_t ctr0, std::uint64_t ctr1,
                                          std::uint64_t ctr2, std::uint64_t ctr3,
                                          std::uint64_t key0, std::uint64_t key1);

// u-th raw 64-bit variate of the stream.
std::uint64_t stream_raw(const RngStream& s, std::uint64_t u);

// u-th uniform on [0,1) with 53 random bits: (raw >> 11) * 2^-53.
double stream_uniform53(const RngStream& s, std::uint64_t u);

// Sequential reader over one stream. Position-based, so two cursors on the
// same stream always produce the same sequence.
class RngCursor {
  public:
    explicit RngCursor(const RngStream& s) : stream_(s) {}

    std::uint64_t next_raw() {
        if (filled_ == 0) refill();
        --filled_;
        return buf_[lane_++];
    }

    double next_uniform53() { return static_cast<double>(next_raw() >> 11) * 0x1.0p-53; }

    bool next_bernoulli(double p) { return next_uniform53() < p; }

    // Unbiased uniform integer in [0, m) by rejection.
    std::uint64_t next_below(std::uint64_t m);

    std::uint64_t position() const { return next_index_ * 4 - filled_; }

  private:
    void refill();

    RngStream stream_;
    std::array<std::uint64_t, 4> buf_{};
    std::uint64_t next_index_ = 0;  // next counter block
    unsigned lane_ = 0;
    unsigned filled_ = 0;
};

}  // namespace bitwords
