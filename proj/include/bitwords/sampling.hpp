#pragma once

#include <cstdint>

#include "bitwords/bitseq.hpp"
#include "bitwords/rng.hpp"

namespace bitwords {

// Bit i is 1 iff the i-th 53-bit uniform of the stream is < p. Repeating a
// call with equal (seed, stream_id, length, p) reproduces the sequence exactly.
BitSequence sample_sequence(const RngStream& stream, std::uint64_t length, double p);

// k-bit word with independent Ber(p) bits; bit t consumes the t-th variate.
Word sample_word(const RngStream& stream, int k, double p);

// Uniform word of exactly the given weight via partial Fisher-Yates selection
// of the one-positions. The weight of the result is asserted, not assumed.
Word sample_fixed_weight_word(const RngStream& stream, int k, int weight);

// Cursor variants for callers that keep drawing from the same stream.
Word sample_word(RngCursor& cursor, int k, double p);
Word sample_fixed_weight_word(RngCursor& cursor, int k, int weight);

}  // namespace bitwords
