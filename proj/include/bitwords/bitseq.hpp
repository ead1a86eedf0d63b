#pragma once

#include <bit>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bitwords/analytic.hpp"

namespace bitwords {

// Packed bit string. Bit i lives at word i/64, position i%64; padding bits in
// the last word are kept zero so equality is plain member comparison.
class BitSequence {
  public:
    BitSequence() = default;
    explicit BitSequence(std::uint64_t n_bits) : size_(n_bits), words_((n_bits + 63) / 64, 0) {}

    std::uint64_t size() const { return size_; }

    bool get(std::uint64_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

    void set(std::uint64_t i, bool v) {
        const std::uint64_t mask = 1ull << (i & 63);
        if (v)
            words_[i >> 6] |= mask;
        else
            words_[i >> 6] &= ~mask;
    }

    const std::uint64_t* data() const { return words_.data(); }

    bool operator==(const BitSequence&) const = default;

    // Raw file layout: 8-byte little-endian bit count, then packed bytes,
    // bit i at byte i/8 position i%8, final-byte padding zero.
    void write_file(const std::string& path) const;
    static BitSequence read_file(const std::string& path);

  private:
    std::uint64_t size_ = 0;
    std::vector<std::uint64_t> words_;
};

// Fixed-width word; bit t of value is the t-th symbol, matching the order in
// which window bits are scanned from a sequence.
struct Word {
    std::uint64_t value = 0;
    int width = 0;
    int weight = 0;
};

Word make_word(std::uint64_t value, int width);

inline double word_log_prob(const Word& w, double p) {
    return word_log_prob(w.width, w.weight, p);
}

}  // namespace bitwords
