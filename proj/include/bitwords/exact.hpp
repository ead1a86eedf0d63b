#pragma once

#include <cstdint>
#include <vector>

#include "bitwords/counting.hpp"

namespace bitwords {

// Block count that may exceed the integer range; carried in log2 form then.
class BlockCount {
  public:
    static BlockCount from_exact(std::uint64_t n);
    static BlockCount from_log2(double log2_n);  // log2_n <= 65536

    bool is_exact() const { return exact_; }
    std::uint64_t exact_value() const;
    double log2_value() const { return log2_; }
    double ln() const;          // natural log of N
    double ln_minus(int n) const;  // natural log of N - n

  private:
    bool exact_ = false;
    std::uint64_t value_ = 0;
    double log2_ = 0.0;
};

// Disjoint-block match model: a word W and N independent k-bit blocks, all
// Ber(p); the distribution of the number of blocks equal to W.
struct AnnealedSpec {
    int k;
    double p;
    BlockCount n_blocks;
    int n_max;
};

// P(count = n) = C(N,n) * sum_i C(k,i) q_i^(n+1) (1-q_i)^(N-n), q_i = p^i (1-p)^(k-i).
// Evaluated termwise in log space; invariant under p <-> 1-p bit for bit.
double annealed_pmf_at(const AnnealedSpec& spec, int n);

// pmf[0..n_max].
std::vector<double> annealed_pmf(const AnnealedSpec& spec);

// As a CountDistribution with tail = 1 - sum(pmf).
CountDistribution annealed_distribution(const AnnealedSpec& spec);

// E[count] = N * match_prob(k, p).
double annealed_mean(const AnnealedSpec& spec);

// E[count | W has weight m] = N * p^m (1-p)^(k-m).
double conditional_mean_fixed_weight(int k, int m, double p, const BlockCount& n_blocks);

// Poisson point mass via log-gamma; stable out to n ~ 10^4.
double poisson_pmf(double lambda, int n);

CountDistribution poisson_distribution(double lambda, int n_max);

// Total variation over the union support; the tail buckets are compared as one
// distinguished outcome, so both inputs should use the same n_max.
double tv_distance(const CountDistribution& a, const CountDistribution& b);

enum class BoundMode { BruteForce, AnalyticBound };

// Measure of the scanned word in the Poisson certificate.
enum class WordSupport { FixedWeight, AllWords };

struct OverlapTerm {
    int ell;          // overlap length, offset d = k - ell
    double joint;     // E[I_i I_j] (exact or bounded, by mode)
    double n_pairs;   // unordered window pairs at this offset: N - d
};

struct TvBoundReport {
    int k = 0;
    double p = 0.0;
    double c = 0.0;
    double lambda = 0.0;
    WordSupport support = WordSupport::FixedWeight;
    BoundMode mode = BoundMode::BruteForce;
    int target_weight = -1;        // FixedWeight only
    double word_prob = 0.0;        // E[I_j]
    std::uint64_t n_windows = 0;
    double lambda_k = 0.0;         // n_windows * word_prob
    double term_self = 0.0;        // sum of E[I_j]^2
    double term_edges = 0.0;       // unordered pairs within distance k
    double bound = 0.0;            // min(1, 1/lambda_k) * (term_self + term_edges)
    std::vector<OverlapTerm> per_overlap;
};

// Total-variation certificate for the window-count law against Po(lambda_k).
// Each unordered pair of windows closer than k contributes
// E[I_i]E[I_j] + E[I_i I_j] once; boundary offsets carry exactly N-d pairs.
// BruteForce evaluates E[I_i I_j] exhaustively (k <= 28); AnalyticBound uses
// the closed-form overlap-class inequalities, valid for p > 1/2:
//   ell <  sqrt(k): E[I_i I_j] <= q^2 (1-p)^(-ell)
//   ell >= sqrt(k): E[I_i I_j] <= q (p^2+(1-p)^2)^ell / mass(weight class)
TvBoundReport stein_chen_bound(int k, double p, double c, double lambda, BoundMode mode,
                               WordSupport support = WordSupport::FixedWeight);

}  // namespace bitwords
