#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <vector>

#include "bitwords/counting.hpp"
#include "bitwords/errors.hpp"
#include "bitwords/rng.hpp"
#include "bitwords/sampling.hpp"

using namespace bitwords;

namespace {

BitSequence from_bits(const std::vector<int>& bits) {
    BitSequence seq(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) seq.set(i, bits[i] != 0);
    return seq;
}

// Window values by direct bit extraction, the independent reference.
std::map<std::uint64_t, std::uint32_t> naive_counts(const BitSequence& seq, int k,
                                                    std::uint64_t n_windows) {
    std::map<std::uint64_t, std::uint32_t> out;
    for (std::uint64_t j = 0; j < n_windows; ++j) {
        std::uint64_t v = 0;
        for (int t = 0; t < k; ++t)
            if (seq.get(j + t)) v |= 1ull << t;
        ++out[v];
    }
    return out;
}

std::vector<std::pair<std::uint64_t, std::uint32_t>> dump(const CountTable& table) {
    std::vector<std::pair<std::uint64_t, std::uint32_t>> out;
    table.for_each_ascending([&](std::uint64_t v, std::uint32_t c) { out.emplace_back(v, c); });
    return out;
}

}  // namespace

TEST_CASE("worked example: 0110110 scanned with k = 3") {
    // Windows: 011, 110, 101, 011, 110.
    const BitSequence seq = from_bits({0, 1, 1, 0, 1, 1, 0});
    const CountTable table = CountTable::build(seq, 3, 5);
    CHECK(table.count_value(0b110) == 2);  // string 011: bit t is symbol t
    CHECK(table.count_value(0b011) == 2);  // string 110
    CHECK(table.count_value(0b101) == 1);  // string 101
    CHECK(table.count_value(0b000) == 0);
    CHECK(table.count_value(0b111) == 0);
    CHECK(table.distinct_keys() == 3);
    CHECK(table.n_windows() == 5);
    CHECK_FALSE(table.saturated());

    const Word w = make_word(0b110, 3);
    CHECK(table.count(w) == 2);
}

TEST_CASE("csv export is ascending with fixed-width hex") {
    const BitSequence seq = from_bits({0, 1, 1, 0, 1, 1, 0});
    const CountTable table = CountTable::build(seq, 3, 5);
    std::ostringstream out;
    table.export_csv(out);
    CHECK(out.str() == "window_hex,weight,count\n3,2,2\n5,2,1\n6,2,2\n");

    // Width follows k: 9 bits pack into 3 nibbles.
    BitSequence ones(9);
    for (int i = 0; i < 9; ++i) ones.set(i, true);
    std::ostringstream out9;
    CountTable::build(ones, 9, 1).export_csv(out9);
    CHECK(out9.str() == "window_hex,weight,count\n1ff,9,1\n");
}

TEST_CASE("random tables agree with the direct reference") {
    RngCursor cur(RngStream{404, 0});
    for (int trial = 0; trial < 100; ++trial) {
        const int k = 1 + static_cast<int>(cur.next_below(4));
        const std::uint64_t n_windows = 1 + cur.next_below(64);
        const double p = 0.1 + 0.8 * cur.next_uniform53();
        const RngStream seq_stream{trial + 1ull, 17};
        const BitSequence seq = sample_sequence(seq_stream, n_windows + k - 1, p);
        const CountTable table = CountTable::build(seq, k, n_windows);
        const auto ref = naive_counts(seq, k, n_windows);

        std::uint64_t total = 0;
        for (std::uint64_t v = 0; v < (1ull << k); ++v) {
            const auto it = ref.find(v);
            const std::uint32_t want = it == ref.end() ? 0 : it->second;
            CHECK(table.count_value(v) == want);
            total += table.count_value(v);
        }
        CHECK(total == n_windows);  // every window lands in exactly one bucket
        CHECK(table.distinct_keys() == ref.size());
    }
}

TEST_CASE("thread count never changes the table") {
    const RngStream s{7, 1};
    const std::uint64_t n_windows = 200000;
    const int k = 12;
    const BitSequence seq = sample_sequence(s, n_windows + k - 1, 0.6);

    CountTable::BuildOptions opt1, opt2, opt8;
    opt1.threads = 1;
    opt2.threads = 2;
    opt8.threads = 8;
    const auto d1 = dump(CountTable::build(seq, k, n_windows, opt1));
    const auto d2 = dump(CountTable::build(seq, k, n_windows, opt2));
    const auto d8 = dump(CountTable::build(seq, k, n_windows, opt8));
    CHECK(d1 == d2);
    CHECK(d1 == d8);

    // Same invariance when the budget forces the sparse backend: at k = 22 the
    // dense array wants 16 MiB while the open-addressing map fits well under 8.
    const int wide_k = 22;
    const BitSequence wide_seq = sample_sequence(s, n_windows + wide_k - 1, 0.6);
    CountTable::BuildOptions sp1 = opt1, sp8 = opt8;
    sp1.memory_budget_bytes = 8ull << 20;
    sp8.memory_budget_bytes = 8ull << 20;
    const auto s1 = dump(CountTable::build(wide_seq, wide_k, n_windows, sp1));
    const auto s8 = dump(CountTable::build(wide_seq, wide_k, n_windows, sp8));
    CHECK(s1 == s8);
    const auto ref = naive_counts(wide_seq, wide_k, n_windows);
    CHECK(s1.size() == ref.size());
    std::uint64_t total = 0;
    for (const auto& [v, c] : s1) {
        const auto it = ref.find(v);
        REQUIRE(it != ref.end());
        CHECK(it->second == c);
        total += c;
    }
    CHECK(total == n_windows);
}

TEST_CASE("dense and sparse backends count identically") {
    const RngStream s{99, 5};
    const int k = 16;
    const std::uint64_t n_windows = 5000;
    const BitSequence seq = sample_sequence(s, n_windows + k - 1, 0.55);

    const CountTable dense = CountTable::build(seq, k, n_windows);
    CountTable::BuildOptions tight;
    tight.memory_budget_bytes = 200 * 1024;  // below the 256 KiB dense array
    const CountTable sparse = CountTable::build(seq, k, n_windows, tight);
    CHECK(dump(dense) == dump(sparse));
    CHECK(dense.memory_bytes() > sparse.memory_bytes());
}

TEST_CASE("weight filter keeps exactly one weight class") {
    const RngStream s{3, 9};
    const int k = 8;
    const std::uint64_t n_windows = 1000;
    const BitSequence seq = sample_sequence(s, n_windows + k - 1, 0.6);

    CountTable::BuildOptions opt;
    opt.weight_filter = 4;
    const CountTable table = CountTable::build(seq, k, n_windows, opt);
    CHECK(table.weight_filter() == 4);

    const auto ref = naive_counts(seq, k, n_windows);
    std::uint64_t expect_total = 0;
    for (const auto& [v, c] : ref) {
        if (std::popcount(v) == 4) {
            CHECK(table.count_value(v) == c);
            expect_total += c;
        } else {
            CHECK(table.count_value(v) == 0);
        }
    }
    std::uint64_t total = 0;
    table.for_each_ascending([&](std::uint64_t v, std::uint32_t c) {
        CHECK(std::popcount(v) == 4);
        total += c;
    });
    CHECK(total == expect_total);
}

TEST_CASE("fixed-weight quenched law is exact word-class arithmetic") {
    const RngStream s{21, 2};
    const int k = 6, weight = 3, n_max = 4;
    const std::uint64_t n_windows = 300;
    const BitSequence seq = sample_sequence(s, n_windows + k - 1, 0.6);
    const CountTable table = CountTable::build(seq, k, n_windows);

    const CountDistribution dist = quenched_distribution_fixed_weight(table, weight, n_max);
    REQUIRE(dist.pmf.size() == n_max + 1);

    // Reference: histogram over the 20 weight-3 words.
    std::vector<double> ref(n_max + 1, 0.0);
    double ref_tail = 0.0;
    int class_size = 0;
    for (std::uint64_t v = 0; v < 64; ++v) {
        if (std::popcount(v) != weight) continue;
        ++class_size;
        const std::uint32_t c = table.count_value(v);
        if (c <= static_cast<std::uint32_t>(n_max))
            ref[c] += 1.0;
        else
            ref_tail += 1.0;
    }
    CHECK(class_size == 20);
    double mass = dist.tail;
    for (int n = 0; n <= n_max; ++n) {
        CHECK(dist.pmf[n] == doctest::Approx(ref[n] / 20.0).epsilon(1e-15));
        mass += dist.pmf[n];
    }
    CHECK(dist.tail == doctest::Approx(ref_tail / 20.0).epsilon(1e-15));
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("all-words quenched law matches direct enumeration") {
    const RngStream s{31, 8};
    const int k = 8, n_max = 4;
    const double p = 0.62;
    const std::uint64_t n_windows = 500;
    const BitSequence seq = sample_sequence(s, n_windows + k - 1, p);
    const CountTable table = CountTable::build(seq, k, n_windows);

    const CountDistribution dist = quenched_distribution_all_words(table, p, n_max);

    std::vector<double> ref(n_max + 1, 0.0);
    double ref_tail = 0.0;
    for (std::uint64_t v = 0; v < 256; ++v) {
        const double prob = std::exp2(word_log_prob(8, std::popcount(v), p));
        const std::uint32_t c = table.count_value(v);
        if (c <= static_cast<std::uint32_t>(n_max))
            ref[c] += prob;
        else
            ref_tail += prob;
    }
    double mass = dist.tail;
    for (int n = 0; n <= n_max; ++n) {
        CHECK(dist.pmf[n] == doctest::Approx(ref[n]).epsilon(1e-12));
        mass += dist.pmf[n];
    }
    CHECK(dist.tail == doctest::Approx(ref_tail).epsilon(1e-12));
    // Unseen words all count zero, so the mass balances to one exactly.
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("disjoint-block simulation modes sample the same law") {
    const RngStream s{11, 6};
    const int k = 4;
    const std::uint64_t n_blocks = 50;
    const double p = 0.6;
    const std::uint64_t trials = 4000;

    SimulateOptions fast, honest;
    fast.fast = true;
    honest.fast = false;

    const auto f = simulate_nonintersecting(s, k, n_blocks, p, trials, fast);
    const auto h = simulate_nonintersecting(s, k, n_blocks, p, trials, honest);
    REQUIRE(f.size() == trials);
    REQUIRE(h.size() == trials);
    // Replays are bitwise identical.
    CHECK(f == simulate_nonintersecting(s, k, n_blocks, p, trials, fast));
    CHECK(h == simulate_nonintersecting(s, k, n_blocks, p, trials, honest));

    // Means agree within 5 sigma of each other; exact mean is N*(p^2+q^2)^k.
    const double exact_mean = static_cast<double>(n_blocks) * std::pow(0.52, k);
    const double mf = std::accumulate(f.begin(), f.end(), 0.0) / trials;
    const double mh = std::accumulate(h.begin(), h.end(), 0.0) / trials;
    const double sigma = std::sqrt(exact_mean / trials);  // near-Poisson spread
    CHECK(std::fabs(mf - exact_mean) < 5 * sigma);
    CHECK(std::fabs(mh - exact_mean) < 5 * sigma);

    // Conditioning the word on a fixed weight shifts the mean to N*q_w.
    SimulateOptions cond;
    cond.fixed_weight = 2;
    const auto c = simulate_nonintersecting(s, k, n_blocks, p, trials, cond);
    const double cond_mean = static_cast<double>(n_blocks) *
                             std::pow(0.6, 2) * std::pow(0.4, 2);
    const double mc = std::accumulate(c.begin(), c.end(), 0.0) / trials;
    CHECK(std::fabs(mc - cond_mean) < 5 * std::sqrt(cond_mean / trials));
}

TEST_CASE("build validation") {
    const BitSequence seq = from_bits({1, 0, 1, 0, 1});
    CHECK_THROWS_AS(CountTable::build(seq, 0, 1), ValidationError);
    CHECK_THROWS_AS(CountTable::build(seq, 65, 1), ValidationError);
    // Sequence too short for the requested window count.
    CHECK_THROWS_AS(CountTable::build(seq, 3, 4), ValidationError);
    CHECK_NOTHROW(CountTable::build(seq, 3, 3));
    CountTable::BuildOptions opt;
    opt.weight_filter = 4;
    CHECK_THROWS_AS(CountTable::build(seq, 3, 3, opt), ValidationError);
}
