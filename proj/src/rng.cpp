#include "bitwords/rng.hpp"

#include "bitwords/errors.hpp"

namespace bitwords {

namespace {

constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ull;
constexpr std::uint64_t kMul1 = 0xCA5A826395121157ull;
constexpr std::uint64_t kBump0 = 0x9E3779B97F4A7C15ull;  // golden ratio
constexpr std::uint64_t kBump1 = 0xBB67AE8584CAA73Bull;  // sqrt(3) - 1

inline void mulhilo(std::uint64_t a, std::uint64_t b, std::uint64_t& hi, std::uint64_t& lo) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(a) * b;
    hi = static_cast<std::uint64_t>(prod >> 64);
    lo = static_cast<std::uint64_t>(prod);
}

}  // namespace

std::array<std::uint64_t, 4> philox_block(std::uint64_t ctr0, std::uint64_t ctr1,
                                          std::uint64_t ctr2, std::uint64_t ctr3,
                                          std::uint64_t key0, std::uint64_t key1) {
    std::uint64_t x0 = ctr0, x1 = ctr1, x2 = ctr2, x3 = ctr3;
    std::uint64_t k0 = key0, k1 = key1;
    for (int round = 0; round < 10; ++round) {
        std::uint64_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, x0, hi0, lo0);
        mulhilo(kMul1, x2, hi1, lo1);
        x0 = hi1 ^ x1 ^ k0;
        x1 = lo1;
        x2 = hi0 ^ x3 ^ k1;
        x3 = lo0;
        k0 += kBump0;
        k1 += kBump1;
    }
    return {x0, x1, x2, x3};
}

std::uint64_t stream_raw(const RngStream& s, std::uint64_t u) {
    // Block index is pre-incremented so variates 0..3 come from raw counter 1,
    // matching the numpy Philox stream for counter-initialized-to-zero keys.
    const auto block = philox_block((u >> 2) + 1, 0, 0, 0, s.seed, s.stream_id);
    return block[u & 3];
}

double stream_uniform53(const RngStream& s, std::uint64_t u) {
    return static_cast<double>(stream_raw(s, u) >> 11) * 0x1.0p-53;
}

void RngCursor::refill() {
    buf_ = philox_block(next_index_ + 1, 0, 0, 0, stream_.seed, stream_.stream_id);
    ++next_index_;
    lane_ = 0;
    filled_ = 4;
}

std::uint64_t RngCursor::next_below(std::uint64_t m) {
    if (m == 0) throw ValidationError("uniform range must be nonempty");
    if ((m & (m - 1)) == 0) return next_raw() & (m - 1);
    // Accept raw values >= 2^64 mod m so residues are equally covered.
    const std::uint64_t limit = (0 - m) % m;
    std::uint64_t x;
    do {
        x = next_raw();
    } while (x < limit);
    return x % m;
}

}  // namespace bitwords
