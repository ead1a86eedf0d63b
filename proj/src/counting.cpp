#include "bitwords/counting.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <thread>

#include "bitwords/analytic.hpp"
#include "bitwords/errors.hpp"
#include "bitwords/sampling.hpp"

namespace bitwords {

namespace {

constexpr std::uint32_t kCountCap = std::numeric_limits<std::uint32_t>::max();

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Open-addressing accumulator for (window value -> count). Linear probing,
// power-of-two capacity, no deletion.
class FlatCountMap {
  public:
    explicit FlatCountMap(std::uint64_t expected_keys) {
        std::uint64_t cap = 16;
        while (cap * 5 < expected_keys * 8) cap <<= 1;  // load factor <= 0.625
        slots_.resize(cap, Slot{kEmpty, 0});
        mask_ = cap - 1;
    }

    void add(std::uint64_t key, std::uint32_t amount, bool& saturated) {
        std::uint64_t i = splitmix64(key) & mask_;
        for (;;) {
            Slot& s = slots_[i];
            if (s.key == key) {
                const std::uint64_t next = static_cast<std::uint64_t>(s.count) + amount;
                if (next >= kCountCap) {
                    s.count = kCountCap;
                    saturated = true;
                } else {
                    s.count = static_cast<std::uint32_t>(next);
                }
                return;
            }
            if (s.key == kEmpty) {
                if (size_ * 8 >= slots_.size() * 5) {
                    grow();
                    i = splitmix64(key) & mask_;
                    continue;
                }
                s.key = key;
                s.count = amount;
                ++size_;
                return;
            }
            i = (i + 1) & mask_;
        }
    }

    std::uint64_t size() const { return size_; }
    std::uint64_t capacity_bytes() const { return slots_.size() * sizeof(Slot); }

    template <typename Fn>
    void visit(Fn&& fn) const {
        for (const Slot& s : slots_)
            if (s.key != kEmpty) fn(s.key, s.count);
    }

  private:
    // Window values are < 2^64 - 1 in practice only for k = 64; reserve the
    // all-ones key by offsetting it, so the sentinel stays unambiguous.
    static constexpr std::uint64_t kEmpty = ~0ull;

    struct Slot {
        std::uint64_t key;
        std::uint32_t count;
    };

    void grow() {
        std::vector<Slot> old = std::move(slots_);
        slots_.assign(old.size() * 2, Slot{kEmpty, 0});
        mask_ = slots_.size() - 1;
        size_ = 0;
        bool dummy = false;
        for (const Slot& s : old)
            if (s.key != kEmpty) add(s.key, s.count, dummy);
    }

    std::vector<Slot> slots_;
    std::uint64_t mask_ = 0;
    std::uint64_t size_ = 0;
};

struct WindowScanner {
    const std::uint64_t* words;
    int k;
    std::uint64_t mask;

    std::uint64_t bit(std::uint64_t i) const { return (words[i >> 6] >> (i & 63)) & 1u; }

    std::uint64_t value_at(std::uint64_t j) const {
        std::uint64_t v = 0;
        for (int t = 0; t < k; ++t) v |= bit(j + t) << t;
        return v;
    }

    std::uint64_t roll(std::uint64_t v, std::uint64_t j_next) const {
        return (v >> 1) | (bit(j_next + k - 1) << (k - 1));
    }
};

void saturating_add_atomic(std::uint32_t& slot, std::atomic<bool>& saturated) {
    std::atomic_ref<std::uint32_t> ref(slot);
    std::uint32_t cur = ref.load(std::memory_order_relaxed);
    for (;;) {
        if (cur == kCountCap) {
            saturated.store(true, std::memory_order_relaxed);
            return;
        }
        if (ref.compare_exchange_weak(cur, cur + 1, std::memory_order_relaxed)) return;
    }
}

}  // namespace

CountTable CountTable::build(const BitSequence& seq, int k, std::uint64_t n_windows) {
    return build(seq, k, n_windows, BuildOptions{});
}

CountTable CountTable::build(const BitSequence& seq, int k, std::uint64_t n_windows,
                             const BuildOptions& options) {
    if (k < 1 || k > 64) throw ValidationError("word length k must lie in [1,64]");
    if (n_windows == 0) throw ValidationError("window count must be >= 1");
    if (seq.size() < n_windows + static_cast<std::uint64_t>(k) - 1)
        throw ValidationError("sequence shorter than n_windows + k - 1 bits");
    if (options.weight_filter && (*options.weight_filter < 0 || *options.weight_filter > k))
        throw ValidationError("weight filter outside [0,k]");
    const int threads = std::max(1, options.threads);

    CountTable table;
    table.k_ = k;
    table.n_windows_ = n_windows;
    table.weight_filter_ = options.weight_filter;

    const std::uint64_t key_space = (k <= 62) ? (1ull << k) : 0;  // 0 = too large to enumerate
    const std::uint64_t dense_bytes = key_space ? key_space * sizeof(std::uint32_t) : ~0ull;
    table.dense_ = k <= 26 && dense_bytes <= options.memory_budget_bytes &&
                   key_space <= std::max<std::uint64_t>(16 * n_windows, 1ull << 20);

    const WindowScanner scan{seq.data(), k, (k == 64) ? ~0ull : ((1ull << k) - 1)};
    const int filter = options.weight_filter.value_or(-1);

    if (table.dense_) {
        table.dense_counts_.assign(key_space, 0);
        std::atomic<bool> saturated{false};
        auto run_range = [&](std::uint64_t j0, std::uint64_t j1, bool atomic) {
            std::uint64_t v = scan.value_at(j0);
            for (std::uint64_t j = j0;;) {
                if (filter < 0 || std::popcount(v) == filter) {
                    if (atomic) {
                        saturating_add_atomic(table.dense_counts_[v], saturated);
                    } else {
                        std::uint32_t& c = table.dense_counts_[v];
                        if (c == kCountCap)
                            saturated.store(true, std::memory_order_relaxed);
                        else
                            ++c;
                    }
                }
                if (++j >= j1) break;
                v = scan.roll(v, j);
            }
        };
        if (threads == 1 || n_windows < 1024) {
            run_range(0, n_windows, false);
        } else {
            const std::uint64_t step = (n_windows + threads - 1) / threads;
            std::vector<std::thread> pool;
            for (int t = 0; t < threads; ++t) {
                const std::uint64_t j0 = t * step;
                const std::uint64_t j1 = std::min(n_windows, j0 + step);
                if (j0 >= j1) break;
                pool.emplace_back([&, j0, j1] { run_range(j0, j1, true); });
            }
            for (auto& th : pool) th.join();
        }
        table.saturated_ = saturated.load();
        std::uint64_t distinct = 0;
        for (std::uint32_t c : table.dense_counts_)
            if (c) ++distinct;
        table.distinct_ = distinct;
    } else {
        std::uint64_t expected = n_windows;
        if (key_space) expected = std::min(expected, key_space);
        if (options.weight_filter)
            expected = std::min(expected, fixed_weight_count(k, *options.weight_filter));
        {
            FlatCountMap probe(expected);
            if (probe.capacity_bytes() > options.memory_budget_bytes)
                throw GuardError("count table over memory budget: needs " +
                                 std::to_string(probe.capacity_bytes()) + " bytes");
        }

        const int n_chunks = threads;
        const std::uint64_t step = (n_windows + n_chunks - 1) / n_chunks;
        std::vector<FlatCountMap> parts;
        parts.reserve(n_chunks);
        std::vector<bool> part_saturated(n_chunks, false);
        for (int t = 0; t < n_chunks; ++t) parts.emplace_back(expected / n_chunks + 16);

        auto run_chunk = [&](int t) {
            const std::uint64_t j0 = t * step;
            const std::uint64_t j1 = std::min(n_windows, j0 + step);
            if (j0 >= j1) return;
            bool sat = false;
            std::uint64_t v = scan.value_at(j0);
            for (std::uint64_t j = j0;;) {
                if (filter < 0 || std::popcount(v) == filter) parts[t].add(v, 1, sat);
                if (++j >= j1) break;
                v = scan.roll(v, j);
            }
            part_saturated[t] = sat;
        };
        if (threads == 1) {
            run_chunk(0);
        } else {
            std::vector<std::thread> pool;
            for (int t = 0; t < n_chunks; ++t) pool.emplace_back(run_chunk, t);
            for (auto& th : pool) th.join();
        }

        // Merge in fixed chunk order; counts add commutatively, so the merged
        // table is identical for every thread count.
        FlatCountMap merged(expected);
        bool saturated = false;
        for (int t = 0; t < n_chunks; ++t) {
            saturated = saturated || part_saturated[t];
            parts[t].visit([&](std::uint64_t key, std::uint32_t cnt) { merged.add(key, cnt, saturated); });
        }
        table.saturated_ = saturated;
        table.keys_.reserve(merged.size());
        table.counts_.reserve(merged.size());
        std::vector<std::pair<std::uint64_t, std::uint32_t>> rows;
        rows.reserve(merged.size());
        merged.visit([&](std::uint64_t key, std::uint32_t cnt) { rows.emplace_back(key, cnt); });
        std::sort(rows.begin(), rows.end());
        for (const auto& [key, cnt] : rows) {
            table.keys_.push_back(key);
            table.counts_.push_back(cnt);
        }
        table.distinct_ = table.keys_.size();
    }

    // Conservation: every scanned window lands in exactly one bucket.
    if (!table.saturated_ && !options.weight_filter) {
        std::uint64_t total = 0;
        table.for_each_ascending([&](std::uint64_t, std::uint32_t c) { total += c; });
        internal_check(total == n_windows, "window counts do not sum to the window count");
    }
    return table;
}

std::uint64_t CountTable::memory_bytes() const {
    if (dense_) return dense_counts_.size() * sizeof(std::uint32_t);
    return keys_.size() * sizeof(std::uint64_t) + counts_.size() * sizeof(std::uint32_t);
}

std::uint32_t CountTable::count_value(std::uint64_t value) const {
    if (dense_) {
        if (value >= dense_counts_.size()) throw ValidationError("window value wider than k bits");
        return dense_counts_[value];
    }
    const auto it = std::lower_bound(keys_.begin(), keys_.end(), value);
    if (it == keys_.end() || *it != value) return 0;
    return counts_[static_cast<std::size_t>(it - keys_.begin())];
}

std::uint32_t CountTable::count(const Word& w) const {
    if (w.width != k_) throw ValidationError("word width does not match table width");
    return count_value(w.value);
}

void CountTable::for_each_ascending(
    const std::function<void(std::uint64_t, std::uint32_t)>& fn) const {
    if (dense_) {
        for (std::uint64_t v = 0; v < dense_counts_.size(); ++v)
            if (dense_counts_[v]) fn(v, dense_counts_[v]);
    } else {
        for (std::size_t i = 0; i < keys_.size(); ++i) fn(keys_[i], counts_[i]);
    }
}

void CountTable::export_csv(std::ostream& out) const {
    out << "window_hex,weight,count\n";
    const int nibbles = (k_ + 3) / 4;
    char buf[64];
    for_each_ascending([&](std::uint64_t v, std::uint32_t c) {
        std::snprintf(buf, sizeof buf, "%0*llx,%d,%u\n", nibbles,
                      static_cast<unsigned long long>(v), std::popcount(v), c);
        out << buf;
    });
}

namespace {

struct KahanSum {
    double s = 0.0, comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
};

// Next larger integer with the same popcount (Gosper); 0 when exhausted.
std::uint64_t next_same_weight(std::uint64_t v) {
    const std::uint64_t c = v & (0 - v);
    const std::uint64_t r = v + c;
    if (r == 0) return 0;
    return r | (((v ^ r) >> 2) / c);
}

void check_distribution(CountDistribution& d) {
    double total = d.tail;
    for (double x : d.pmf) total += x;
    internal_check(std::abs(total - 1.0) <= 1e-9, "count distribution does not sum to 1");
}

}  // namespace

CountDistribution quenched_distribution_fixed_weight(const CountTable& table, int weight,
                                                     int n_max) {
    if (n_max < 0) throw ValidationError("n_max must be >= 0");
    if (weight < 0 || weight > table.k()) throw ValidationError("weight outside [0,k]");
    if (table.weight_filter() && *table.weight_filter() != weight)
        throw ValidationError("table was filtered to a different weight");

    const int k = table.k();
    const std::uint64_t total_words = fixed_weight_count(k, weight);
    std::vector<std::uint64_t> bucket(static_cast<std::size_t>(n_max) + 2, 0);
    std::uint64_t v = (weight == 0) ? 0 : ((weight == 64) ? ~0ull : ((1ull << weight) - 1));
    const std::uint64_t limit = (k == 64) ? ~0ull : ((1ull << k) - 1);
    for (;;) {
        const std::uint32_t c = table.count_value(v);
        bucket[std::min<std::uint64_t>(c, static_cast<std::uint64_t>(n_max) + 1)] += 1;
        if (weight == 0) break;
        const std::uint64_t next = next_same_weight(v);
        if (next == 0 || next > limit) break;
        v = next;
    }
    std::uint64_t seen = 0;
    for (std::uint64_t b : bucket) seen += b;
    internal_check(seen == total_words, "weight class enumeration incomplete");

    CountDistribution out;
    out.pmf.resize(static_cast<std::size_t>(n_max) + 1);
    const double denom = static_cast<double>(total_words);
    for (int n = 0; n <= n_max; ++n) out.pmf[n] = static_cast<double>(bucket[n]) / denom;
    out.tail = static_cast<double>(bucket[static_cast<std::size_t>(n_max) + 1]) / denom;
    check_distribution(out);
    return out;
}

CountDistribution quenched_distribution_all_words(const CountTable& table, double p, int n_max) {
    if (n_max < 0) throw ValidationError("n_max must be >= 0");
    if (!(p > 0.0) || !(p < 1.0)) throw ValidationError("p must lie strictly inside (0,1)");
    if (table.weight_filter())
        throw ValidationError("all-words distribution needs an unfiltered table");

    const int k = table.k();
    // Word mass depends only on weight.
    std::vector<double> mass(static_cast<std::size_t>(k) + 1);
    for (int w = 0; w <= k; ++w)
        mass[w] = std::exp(w * std::log(p) + (k - w) * std::log(1.0 - p));

    std::vector<KahanSum> bucket(static_cast<std::size_t>(n_max) + 2);
    KahanSum present;
    table.for_each_ascending([&](std::uint64_t v, std::uint32_t c) {
        const double m = mass[std::popcount(v)];
        present.add(m);
        bucket[std::min<std::uint64_t>(c, static_cast<std::uint64_t>(n_max) + 1)].add(m);
    });
    // Words never seen sit in the zero bucket.
    bucket[0].add(1.0 - present.s);

    CountDistribution out;
    out.pmf.resize(static_cast<std::size_t>(n_max) + 1);
    for (int n = 0; n <= n_max; ++n) out.pmf[n] = bucket[n].s;
    out.tail = bucket[static_cast<std::size_t>(n_max) + 1].s;
    check_distribution(out);
    return out;
}

namespace {

double exact_pow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

std::uint32_t binomial_by_inversion(RngCursor& cur, std::uint64_t n, double q) {
    const double mu = static_cast<double>(n) * q;
    if (mu > 500.0)
        throw GuardError("fast block simulation limited to mean counts <= 500, got " +
                         std::to_string(mu));
    const double u = cur.next_uniform53();
    double pj = std::exp(static_cast<double>(n) * std::log1p(-q));
    double cdf = pj;
    const double r = q / (1.0 - q);
    std::uint64_t j = 0;
    const std::uint64_t j_cap =
        std::min<std::uint64_t>(n, static_cast<std::uint64_t>(mu + 60.0 * std::sqrt(mu + 1.0) + 200.0));
    while (u >= cdf && j < j_cap) {
        pj *= static_cast<double>(n - j) / static_cast<double>(j + 1) * r;
        ++j;
        cdf += pj;
    }
    return static_cast<std::uint32_t>(j);
}

}  // namespace

std::vector<std::uint32_t> simulate_nonintersecting(const RngStream& stream, int k,
                                                    std::uint64_t n_blocks, double p,
                                                    std::uint64_t trials,
                                                    const SimulateOptions& options) {
    if (k < 1 || k > 64) throw ValidationError("word length k must lie in [1,64]");
    if (n_blocks == 0) throw ValidationError("block count must be >= 1");
    if (!(p > 0.0) || !(p < 1.0)) throw ValidationError("p must lie strictly inside (0,1)");
    if (!options.fast) {
        const double bits = static_cast<double>(trials) * static_cast<double>(n_blocks) * k;
        if (bits > 0x1p40)
            throw GuardError("honest block simulation would draw more than 2^40 bits");
    }

    std::vector<std::uint32_t> counts(trials, 0);
    for (std::uint64_t t = 0; t < trials; ++t) {
        RngCursor cur(stream.child(t));
        const Word w = options.fixed_weight ? sample_fixed_weight_word(cur, k, *options.fixed_weight)
                                            : sample_word(cur, k, p);
        if (options.fast) {
            const double q = exact_pow(p, w.weight) * exact_pow(1.0 - p, k - w.weight);
            counts[t] = binomial_by_inversion(cur, n_blocks, q);
        } else {
            std::uint32_t m = 0;
            for (std::uint64_t b = 0; b < n_blocks; ++b) {
                std::uint64_t v = 0;
                for (int bit = 0; bit < k; ++bit)
                    if (cur.next_bernoulli(p)) v |= 1ull << bit;
                if (v == w.value && m != kCountCap) ++m;
            }
            counts[t] = m;
        }
    }
    return counts;
}

namespace {

// Words whose length-ell prefix equals their suffix are exactly the periodic
// extensions of their first d = k - ell bits.
std::uint64_t periodic_extension(std::uint64_t y, int d, int k) {
    std::uint64_t word = y;
    int len = d;
    while (len < k) {
        word |= word << len;
        len *= 2;
    }
    return (k == 64) ? word : (word & ((1ull << k) - 1));
}

void check_bruteforce_args(int k, int ell) {
    if (k < 2 || k > 64) throw ValidationError("overlap enumeration needs k in [2,64]");
    if (ell < 1 || ell >= k) throw ValidationError("overlap length must lie in [1,k-1]");
    if (k > 28) throw GuardError("exhaustive overlap enumeration limited to k <= 28");
}

}  // namespace

double indicator_product_mean_bruteforce(int k, int n_k, int ell, double p) {
    check_bruteforce_args(k, ell);
    if (n_k < 0 || n_k > k) throw ValidationError("weight outside [0,k]");
    if (!(p > 0.0) || !(p < 1.0)) throw ValidationError("p must lie strictly inside (0,1)");

    const int d = k - ell;
    std::vector<double> pow_p(2 * k + 1), pow_q(2 * k + 1);
    pow_p[0] = pow_q[0] = 1.0;
    for (int i = 1; i <= 2 * k; ++i) {
        pow_p[i] = pow_p[i - 1] * p;
        pow_q[i] = pow_q[i - 1] * (1.0 - p);
    }
    const std::uint64_t prefix_mask = (1ull << ell) - 1;
    KahanSum sum;
    for (std::uint64_t y = 0; y < (1ull << d); ++y) {
        const std::uint64_t word = periodic_extension(y, d, k);
        if (std::popcount(word) != n_k) continue;
        const int u = std::popcount(word & prefix_mask);
        // Both windows match iff 2k-ell specific bits hold: the word plus d
        // fresh bits repeating its prefix.
        sum.add(pow_p[2 * n_k - u] * pow_q[2 * (k - n_k) - (ell - u)]);
    }
    return sum.s / static_cast<double>(fixed_weight_count(k, n_k));
}

double indicator_product_mean_bruteforce_all(int k, int ell, double p) {
    check_bruteforce_args(k, ell);
    if (!(p > 0.0) || !(p < 1.0)) throw ValidationError("p must lie strictly inside (0,1)");

    const int d = k - ell;
    std::vector<double> pow_p(2 * k + 1), pow_q(2 * k + 1);
    pow_p[0] = pow_q[0] = 1.0;
    for (int i = 1; i <= 2 * k; ++i) {
        pow_p[i] = pow_p[i - 1] * p;
        pow_q[i] = pow_q[i - 1] * (1.0 - p);
    }
    KahanSum sum;
    for (std::uint64_t y = 0; y < (1ull << d); ++y) {
        const std::uint64_t word = periodic_extension(y, d, k);
        const int n = std::popcount(word);
        const int wy = std::popcount(y);
        // Ber^k mass of the word times the chance of the combined (k+d)-bit pattern.
        sum.add(pow_p[n] * pow_q[k - n] * pow_p[n + wy] * pow_q[k + d - n - wy]);
    }
    return sum.s;
}

}  // namespace bitwords
