#include "bitwords/sampling.hpp"

#include <array>

#include "bitwords/errors.hpp"

namespace bitwords {

namespace {

void check_prob(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw ValidationError("p must lie strictly inside (0,1)");
}

}  // namespace

BitSequence sample_sequence(const RngStream& stream, std::uint64_t length, double p) {
    check_prob(p);
    BitSequence seq(length);
    RngCursor cur(stream);
    for (std::uint64_t i = 0; i < length; ++i) {
        if (cur.next_bernoulli(p)) seq.set(i, true);
    }
    return seq;
}

Word sample_word(RngCursor& cursor, int k, double p) {
    check_prob(p);
    if (k < 1 || k > 64) throw ValidationError("word length k must lie in [1,64]");
    std::uint64_t v = 0;
    for (int t = 0; t < k; ++t) {
        if (cursor.next_bernoulli(p)) v |= 1ull << t;
    }
    return make_word(v, k);
}

Word sample_word(const RngStream& stream, int k, double p) {
    RngCursor cur(stream);
    return sample_word(cur, k, p);
}

Word sample_fixed_weight_word(RngCursor& cursor, int k, int weight) {
    if (k < 1 || k > 64) throw ValidationError("word length k must lie in [1,64]");
    if (weight < 0 || weight > k) throw ValidationError("weight outside [0,k]");
    std::array<int, 64> pos;
    for (int i = 0; i < k; ++i) pos[i] = i;
    std::uint64_t v = 0;
    for (int i = 0; i < weight; ++i) {
        const int j = i + static_cast<int>(cursor.next_below(static_cast<std::uint64_t>(k - i)));
        std::swap(pos[i], pos[j]);
        v |= 1ull << pos[i];
    }
    Word w = make_word(v, k);
    internal_check(w.weight == weight, "fixed-weight sample has wrong weight");
    return w;
}

Word sample_fixed_weight_word(const RngStream& stream, int k, int weight) {
    RngCursor cur(stream);
    return sample_fixed_weight_word(cur, k, weight);
}

}  // namespace bitwords
