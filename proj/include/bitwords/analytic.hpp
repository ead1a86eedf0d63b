#pragma once

#include <cstdint>
#include <optional>

namespace bitwords {

// Bit distribution and word length under test. p is the probability of a 1 bit.
struct ModelParams {
    double p;
    int k;

    ModelParams(double p_, int k_);  // validates 0 < p < 1 strictly, 1 <= k <= 64
};

// Weight-conditioned sampling target: words of length k restricted to Hamming
// weight n = floor(p*k - c*sqrt(k)), window budget floor(lambda / word_prob).
struct FixedWeightSpec {
    double c;
    int target_weight;  // n, derived from (params, c)
    double lambda;      // target mean occurrence count, > 0
};

FixedWeightSpec make_fixed_weight_spec(const ModelParams& params, double c, double lambda);

// How the number of scanned windows N scales with k.
enum class RegimeKind {
    EntropyScaled,          // N = round(2^(k*H(p)) * a^sqrt(k)), a > 0
    EntropyExponentShifted, // N = round(2^(k*(H(p)+delta))), delta in (-H(p), 1-H(p))
    ConditionalPoisson,     // N = floor(lambda / word_prob) for the weight target
    Explicit,               // N given directly
};

struct RegimeRule {
    RegimeKind kind;
    double a = 1.0;
    double delta = 0.0;
    double c = 0.0;
    double lambda = 1.0;
    std::uint64_t explicit_windows = 0;

    static RegimeRule entropy_scaled(double a);
    static RegimeRule entropy_exponent_shifted(double delta);
    static RegimeRule conditional_poisson(double c, double lambda);
    static RegimeRule explicit_windows_rule(std::uint64_t n);
};

struct ResolvedRegime {
    std::uint64_t n_windows;   // N, exact
    double log2_windows;       // log2(N)
    int target_weight;         // n for ConditionalPoisson, -1 otherwise
    double realized_lambda;    // N * word_prob for ConditionalPoisson, NaN otherwise
};

// Exact integer window budget. Throws GuardError when log2(N) would exceed 62.
ResolvedRegime resolve_regime(const RegimeRule& rule, const ModelParams& params);

// log2(N) without the integer cap, for closed-form evaluation at large k.
double resolve_regime_log2(const RegimeRule& rule, const ModelParams& params);

// Same, for k beyond the 64-bit word range (pure-formula paths only).
double resolve_regime_log2(const RegimeRule& rule, double p, int k);

// H(p) = -p*log2(p) - (1-p)*log2(1-p)
double binary_entropy(double p);

// Standard Gaussian CDF, absolute error <= 1e-12.
double gaussian_cdf(double s);

// Gaussian CDF with variance p(1-p): Phi(s / sqrt(p(1-p))).
double gaussian_cdf_scaled(double s, double p);

// log2 probability of a specific word: weight*log2(p) + (k-weight)*log2(1-p).
double word_log_prob(int k, int weight, double p);

// Exponent c solving a = (p/(1-p))^c, i.e. ln(a)/ln(p/(1-p)). Requires p != 1/2.
double log_odds_exponent(double a, double p);

// Limiting mass at zero matches for scale base a: Phi_p(-log_odds_exponent(a,p)).
// Requires p in (1/2, 1), a > 0.
double limit_atom(double a, double p);

// Probability two independent Ber(p)^k words coincide: (p^2 + (1-p)^2)^k.
double match_prob(int k, double p);

// Exact C(k, n) for k <= 64 (max value C(64,32) fits in 61 bits).
std::uint64_t fixed_weight_count(int k, int n);

// Mass of the weight-n class under Ber(p)^k, exact (log-gamma) alongside the
// local central-limit approximation (2*pi*k*p*(1-p))^(-1/2) * exp(-(n-pk)^2/(2kp(1-p))).
struct WeightClassMass {
    double exact;
    double local_clt;
    double ratio() const { return exact / local_clt; }
};

WeightClassMass fixed_weight_mass(int k, int n, double p);

// floor(p*k - c*sqrt(k)); error if outside [0, k].
int weight_floor(int k, double p, double c);

}  // namespace bitwords
