#include "bitwords/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bitwords/analytic.hpp"
#include "bitwords/errors.hpp"

namespace bitwords {

namespace {

constexpr double kLn2 = 0.693147180559945309417232121458176568;

struct KahanSum {
    double s = 0.0, comp = 0.0;
    void add(double x) {
        const double y = x - comp;
        const double t = s + y;
        comp = (t - s) - y;
        s = t;
    }
};

}  // namespace

BlockCount BlockCount::from_exact(std::uint64_t n) {
    if (n == 0) throw ValidationError("block count must be >= 1");
    BlockCount b;
    b.exact_ = true;
    b.value_ = n;
    b.log2_ = std::log2(static_cast<double>(n));
    return b;
}

BlockCount BlockCount::from_log2(double log2_n) {
    if (!std::isfinite(log2_n) || log2_n < 0.0)
        throw ValidationError("log2 block count must be finite and >= 0");
    if (log2_n > 65536.0)
        throw GuardError("log2 block count exceeds the 65536 evaluation cap");
    BlockCount b;
    b.exact_ = false;
    b.log2_ = log2_n;
    if (log2_n <= 62.0) {
        b.exact_ = true;
        b.value_ = static_cast<std::uint64_t>(std::round(std::exp2(static_cast<long double>(log2_n))));
        if (b.value_ == 0) b.value_ = 1;
    }
    return b;
}

std::uint64_t BlockCount::exact_value() const {
    internal_check(exact_, "block count only available in log2 form");
    return value_;
}

double BlockCount::ln() const {
    if (exact_) return std::log(static_cast<double>(value_));
    return log2_ * kLn2;
}

double BlockCount::ln_minus(int n) const {
    internal_check(n >= 0, "negative count");
    if (exact_) {
        internal_check(value_ > static_cast<std::uint64_t>(n), "block count underflow");
        return std::log(static_cast<double>(value_ - static_cast<std::uint64_t>(n)));
    }
    // N is beyond 2^62 here, so subtracting n is far below double resolution.
    return ln();
}

namespace {

// ln C(N, n) = n ln N - ln n! + sum_{j=1}^{n-1} log1p(-j/N)
double log_choose_blocks(const BlockCount& nb, int n) {
    const double ln_n_blocks = nb.ln();
    double s = n * ln_n_blocks - std::lgamma(n + 1.0);
    for (int j = 1; j < n; ++j) {
        const double r = nb.is_exact()
                             ? static_cast<double>(j) / static_cast<double>(nb.exact_value())
                             : std::exp(std::log(static_cast<double>(j)) - ln_n_blocks);
        s += std::log1p(-r);
    }
    return s;
}

// log1p(-q)/(-q), the correction from exp(-m) to (1-q)^(m/q).
double log1p_ratio(double q) {
    if (q > 1e-4) return std::log1p(-q) / (-q);
    return 1.0 + q * (0.5 + q * (1.0 / 3.0 + q * 0.25));
}

void validate_annealed(const AnnealedSpec& spec) {
    // The pmf is a closed formula in k; no 64-bit word is materialized, so k
    // may exceed the word range.
    if (spec.k < 1 || spec.k > 65536)
        throw ValidationError("word length k must lie in [1, 65536]");
    if (!(spec.p > 0.0) || !(spec.p < 1.0))
        throw ValidationError("p must lie strictly inside (0,1)");
    if (spec.n_max < 0) throw ValidationError("n_max must be >= 0");
}

struct TermStats {
    long dropped = 0;
};

// One pmf value. p is canonicalized to the pair (hi, 1-hi): 1-hi is exact for
// hi >= 1/2, so p and its computed complement 1-p reduce to identical factors
// (at most one ulp of adjustment on the smaller side). With the i-sum paired
// palindromically (i with k-i), swapping p and 1-p reproduces the same float
// bit for bit.
double pmf_value(const AnnealedSpec& spec, int n, TermStats* stats) {
    const int k = spec.k;
    const double hi = std::max(spec.p, 1.0 - spec.p);
    const double lo = 1.0 - hi;
    const bool lo_side = spec.p < 0.5;
    const double lnh = std::log(hi);
    const double lnl = std::log(lo);
    if (spec.n_blocks.is_exact() &&
        static_cast<std::uint64_t>(n) > spec.n_blocks.exact_value())
        return 0.0;

    const double ln_choose = log_choose_blocks(spec.n_blocks, n);
    const bool no_remainder = spec.n_blocks.is_exact() &&
                              spec.n_blocks.exact_value() == static_cast<std::uint64_t>(n);
    const double ln_rem = no_remainder ? 0.0 : spec.n_blocks.ln_minus(n);

    // log2 of full terms below this are dropped (each < 2^-1100).
    constexpr double kDropLog2 = -1100.0;

    std::vector<double> lt(static_cast<std::size_t>(k) + 1,
                           -std::numeric_limits<double>::infinity());
    for (int i = 0; i <= k; ++i) {
        const int j = lo_side ? k - i : i;  // exponent on the hi factor
        const double lqi = j * lnh + (k - j) * lnl;
        double expo = 0.0;
        if (!no_remainder) {
            const double log_m = lqi + ln_rem;
            if (log_m > std::log(700.0) && log_m > std::log(20.0 * (n + 1.0))) {
                // (1-q_i)^(N-n) < e^-700 while the combinatorial growth in n is
                // capped by m > 20 n, so the whole term is below the drop line.
                if (stats) ++stats->dropped;
                continue;
            }
            const double m = std::exp(log_m);
            expo = -m * log1p_ratio(std::exp(lqi));
        }
        const double log_binom =
            std::lgamma(k + 1.0) - (std::lgamma(i + 1.0) + std::lgamma(k - i + 1.0));
        const double full = ln_choose + log_binom + (n + 1) * lqi + expo;
        if (full < kDropLog2 * kLn2) {
            if (stats) ++stats->dropped;
            continue;
        }
        lt[i] = full;
    }

    double mx = -std::numeric_limits<double>::infinity();
    for (double v : lt) mx = std::max(mx, v);
    if (!std::isfinite(mx)) return 0.0;

    // Palindromic pairing: e_i + e_{k-i} first, then one fixed-order pass.
    KahanSum sum;
    for (int i = 0; 2 * i < k; ++i) {
        const double a = std::isfinite(lt[i]) ? std::exp(lt[i] - mx) : 0.0;
        const double b = std::isfinite(lt[k - i]) ? std::exp(lt[k - i] - mx) : 0.0;
        sum.add(a + b);
    }
    if (k % 2 == 0) {
        const double mid = std::isfinite(lt[k / 2]) ? std::exp(lt[k / 2] - mx) : 0.0;
        sum.add(mid);
    }
    return std::exp(mx + std::log(sum.s));
}

}  // namespace

double annealed_pmf_at(const AnnealedSpec& spec, int n) {
    validate_annealed(spec);
    if (n < 0) throw ValidationError("count must be >= 0");
    return pmf_value(spec, n, nullptr);
}

std::vector<double> annealed_pmf(const AnnealedSpec& spec) {
    validate_annealed(spec);
    std::vector<double> out(static_cast<std::size_t>(spec.n_max) + 1);
    for (int n = 0; n <= spec.n_max; ++n) out[n] = pmf_value(spec, n, nullptr);
    return out;
}

CountDistribution annealed_distribution(const AnnealedSpec& spec) {
    CountDistribution d;
    d.pmf = annealed_pmf(spec);
    double total = 0.0;
    for (double x : d.pmf) total += x;
    d.tail = std::max(0.0, 1.0 - total);
    return d;
}

double annealed_mean(const AnnealedSpec& spec) {
    validate_annealed(spec);
    const double log2_mean =
        spec.n_blocks.log2_value() + spec.k * std::log2(spec.p * spec.p + (1.0 - spec.p) * (1.0 - spec.p));
    if (spec.n_blocks.is_exact())
        return static_cast<double>(spec.n_blocks.exact_value()) * match_prob(spec.k, spec.p);
    return std::exp2(log2_mean);
}

double conditional_mean_fixed_weight(int k, int m, double p, const BlockCount& n_blocks) {
    const double lp = word_log_prob(k, m, p);
    if (n_blocks.is_exact())
        return static_cast<double>(n_blocks.exact_value()) * std::exp2(lp);
    return std::exp2(n_blocks.log2_value() + lp);
}

double poisson_pmf(double lambda, int n) {
    if (!(lambda > 0.0)) throw ValidationError("poisson mean must be positive");
    if (n < 0) throw ValidationError("count must be >= 0");
    return std::exp(-lambda + n * std::log(lambda) - std::lgamma(n + 1.0));
}

CountDistribution poisson_distribution(double lambda, int n_max) {
    if (n_max < 0) throw ValidationError("n_max must be >= 0");
    CountDistribution d;
    d.pmf.resize(static_cast<std::size_t>(n_max) + 1);
    double total = 0.0;
    for (int n = 0; n <= n_max; ++n) {
        d.pmf[n] = poisson_pmf(lambda, n);
        total += d.pmf[n];
    }
    d.tail = std::max(0.0, 1.0 - total);
    return d;
}

double tv_distance(const CountDistribution& a, const CountDistribution& b) {
    const auto check_norm = [](const CountDistribution& d, const char* name) {
        double total = d.tail;
        for (double x : d.pmf) total += x;
        if (std::abs(total - 1.0) > 1e-6)
            throw ValidationError(std::string(name) + " distribution is not normalized");
    };
    check_norm(a, "first");
    check_norm(b, "second");
    const std::size_t n = std::max(a.pmf.size(), b.pmf.size());
    double sum = std::abs(a.tail - b.tail);
    for (std::size_t i = 0; i < n; ++i) {
        const double pa = i < a.pmf.size() ? a.pmf[i] : 0.0;
        const double pb = i < b.pmf.size() ? b.pmf[i] : 0.0;
        sum += std::abs(pa - pb);
    }
    return 0.5 * sum;
}

namespace {

double iter_pow(double base, int e) {
    double r = 1.0;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

}  // namespace

TvBoundReport stein_chen_bound(int k, double p, double c, double lambda, BoundMode mode,
                               WordSupport support) {
    if (k < 2 || k > 64) throw ValidationError("certificate needs k in [2,64]");
    if (!(p > 0.0) || !(p < 1.0)) throw ValidationError("p must lie strictly inside (0,1)");
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    if (mode == BoundMode::BruteForce && k > 28)
        throw GuardError("exhaustive overlap enumeration limited to k <= 28");
    if (mode == BoundMode::AnalyticBound) {
        if (support != WordSupport::FixedWeight)
            throw ValidationError("analytic overlap bound applies to the fixed-weight support");
        if (!(p > 0.5))
            throw ValidationError("analytic overlap bound requires p > 1/2");
    }

    TvBoundReport rep;
    rep.k = k;
    rep.p = p;
    rep.c = c;
    rep.lambda = lambda;
    rep.support = support;
    rep.mode = mode;

    long double q_ld;
    if (support == WordSupport::FixedWeight) {
        rep.target_weight = weight_floor(k, p, c);
        q_ld = 1.0L;
        for (int i = 0; i < rep.target_weight; ++i) q_ld *= static_cast<long double>(p);
        for (int i = 0; i < k - rep.target_weight; ++i) q_ld *= 1.0L - static_cast<long double>(p);
    } else {
        const long double base = static_cast<long double>(p) * p +
                                 (1.0L - static_cast<long double>(p)) * (1.0L - static_cast<long double>(p));
        q_ld = 1.0L;
        for (int i = 0; i < k; ++i) q_ld *= base;
    }
    rep.word_prob = static_cast<double>(q_ld);

    const long double lam = static_cast<long double>(lambda);
    if (lam < q_ld)
        throw ValidationError("lambda below single-window match probability; window budget would be 0");
    if (std::log2(lambda) - std::log2(rep.word_prob) > 62.0)
        throw GuardError("window budget overflows the integer range");
    long double cand = std::floor(lam / q_ld);
    while (cand * q_ld > lam) cand -= 1.0L;
    while ((cand + 1.0L) * q_ld <= lam) cand += 1.0L;
    rep.n_windows = static_cast<std::uint64_t>(cand);
    rep.lambda_k = static_cast<double>(cand * q_ld);

    const double q = rep.word_prob;
    const double n_windows = static_cast<double>(rep.n_windows);
    rep.term_self = n_windows * q * q;

    const double sqrt_k = std::sqrt(static_cast<double>(k));
    double edges = 0.0;
    for (int d = 1; d < k; ++d) {
        if (static_cast<std::uint64_t>(d) >= rep.n_windows) break;
        const int ell = k - d;
        double joint;
        if (mode == BoundMode::BruteForce) {
            joint = (support == WordSupport::FixedWeight)
                        ? indicator_product_mean_bruteforce(k, rep.target_weight, ell, p)
                        : indicator_product_mean_bruteforce_all(k, ell, p);
        } else if (ell < sqrt_k) {
            joint = q * q * iter_pow(1.0 / (1.0 - p), ell);
        } else {
            const double class_mass = fixed_weight_mass(k, rep.target_weight, p).exact;
            joint = q * iter_pow(p * p + (1.0 - p) * (1.0 - p), ell) / class_mass;
        }
        const double pairs = static_cast<double>(rep.n_windows - static_cast<std::uint64_t>(d));
        rep.per_overlap.push_back(OverlapTerm{ell, joint, pairs});
        edges += pairs * (q * q + joint);
    }
    rep.term_edges = edges;
    rep.bound = std::min(1.0, 1.0 / rep.lambda_k) * (rep.term_self + rep.term_edges);
    return rep;
}

}  // namespace bitwords
