#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "bitwords/bitseq.hpp"
#include "bitwords/rng.hpp"

namespace bitwords {

// Multiplicities of every k-bit window in a scanned sequence. Backed by a
// direct-indexed array when 2^k is small against the window count, otherwise
// by an open-addressing map sized to min(N, 2^k) keys. Counts saturate at
// 2^32-1 and set a flag instead of wrapping. Worst-case memory is ~12 bytes
// per distinct window plus load-factor headroom.
class CountTable {
  public:
    struct BuildOptions {
        int threads = 1;
        std::optional<int> weight_filter;          // record only windows of this weight
        std::uint64_t memory_budget_bytes = 2ull << 30;
    };

    // Scans windows j = 0 .. n_windows-1 of width k; window j+1 reuses window j
    // shifted by one bit. Identical results for any thread count.
    static CountTable build(const BitSequence& seq, int k, std::uint64_t n_windows,
                            const BuildOptions& options);
    static CountTable build(const BitSequence& seq, int k, std::uint64_t n_windows);

    int k() const { return k_; }
    std::uint64_t n_windows() const { return n_windows_; }
    bool saturated() const { return saturated_; }
    std::optional<int> weight_filter() const { return weight_filter_; }
    std::uint64_t distinct_keys() const { return distinct_; }
    std::uint64_t memory_bytes() const;

    std::uint32_t count_value(std::uint64_t value) const;
    std::uint32_t count(const Word& w) const;

    // Visits (value, count) for every recorded window value in ascending value
    // order; count-zero dense slots are skipped.
    void for_each_ascending(const std::function<void(std::uint64_t, std::uint32_t)>& fn) const;

    // `window_hex,weight,count` rows ascending by value, distinct keys only.
    void export_csv(std::ostream& out) const;

  private:
    int k_ = 0;
    std::uint64_t n_windows_ = 0;
    bool dense_ = false;
    bool saturated_ = false;
    std::optional<int> weight_filter_;
    std::uint64_t distinct_ = 0;
    std::vector<std::uint32_t> dense_counts_;
    std::vector<std::uint64_t> keys_;    // sparse: sorted ascending after build
    std::vector<std::uint32_t> counts_;  // sparse: aligned with keys_
};

// Head of a count distribution: pmf over 0..n_max plus the mass beyond.
struct CountDistribution {
    std::vector<double> pmf;  // size n_max + 1
    double tail = 0.0;
    int n_max() const { return static_cast<int>(pmf.size()) - 1; }
};

// Distribution of the count of a uniformly chosen weight-w word. Exact: every
// pmf entry is an integer count of words divided by C(k, w).
CountDistribution quenched_distribution_fixed_weight(const CountTable& table, int weight, int n_max);

// Distribution of the count of a Ber(p)^k-distributed word; each count bucket
// accumulates word probabilities with compensated summation.
CountDistribution quenched_distribution_all_words(const CountTable& table, double p, int n_max);

struct SimulateOptions {
    bool fast = true;                 // draw Binomial(n_blocks, word_prob) directly
    std::optional<int> fixed_weight;  // condition the word on this weight
};

// Match counts of a fresh word against disjoint blocks, one entry per trial.
// Fast and honest modes sample the same law; trial t consumes stream.child(t).
std::vector<std::uint32_t> simulate_nonintersecting(const RngStream& stream, int k,
                                                    std::uint64_t n_blocks, double p,
                                                    std::uint64_t trials,
                                                    const SimulateOptions& options = {});

// E[I_i I_j] for two windows at offset k - ell (overlap ell), word uniform on
// the weight-n_k class. Exhaustive over the self-overlapping words; k <= 28.
double indicator_product_mean_bruteforce(int k, int n_k, int ell, double p);

// Same expectation with the word drawn Ber(p)^k over all 2^k words.
double indicator_product_mean_bruteforce_all(int k, int ell, double p);

}  // namespace bitwords
