#include "bitwords/analytic.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "bitwords/errors.hpp"

namespace bitwords {

namespace {

void check_prob(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw ValidationError("p must lie strictly inside (0,1), got " + std::to_string(p));
}

void check_width(int k) {
    if (k < 1 || k > 64)
        throw ValidationError("word length k must lie in [1,64], got " + std::to_string(k));
}

}  // namespace

ModelParams::ModelParams(double p_, int k_) : p(p_), k(k_) {
    check_prob(p);
    check_width(k);
}

FixedWeightSpec make_fixed_weight_spec(const ModelParams& params, double c, double lambda) {
    if (!(lambda > 0.0))
        throw ValidationError("lambda must be positive, got " + std::to_string(lambda));
    return FixedWeightSpec{c, weight_floor(params.k, params.p, c), lambda};
}

RegimeRule RegimeRule::entropy_scaled(double a) {
    if (!(a > 0.0)) throw ValidationError("scale base a must be positive");
    RegimeRule r;
    r.kind = RegimeKind::EntropyScaled;
    r.a = a;
    return r;
}

RegimeRule RegimeRule::entropy_exponent_shifted(double delta) {
    RegimeRule r;
    r.kind = RegimeKind::EntropyExponentShifted;
    r.delta = delta;
    return r;
}

RegimeRule RegimeRule::conditional_poisson(double c, double lambda) {
    if (!(lambda > 0.0)) throw ValidationError("lambda must be positive");
    RegimeRule r;
    r.kind = RegimeKind::ConditionalPoisson;
    r.c = c;
    r.lambda = lambda;
    return r;
}

RegimeRule RegimeRule::explicit_windows_rule(std::uint64_t n) {
    if (n == 0) throw ValidationError("explicit window count must be >= 1");
    RegimeRule r;
    r.kind = RegimeKind::Explicit;
    r.explicit_windows = n;
    return r;
}

double binary_entropy(double p) {
    check_prob(p);
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

double gaussian_cdf(double s) {
    return 0.5 * std::erfc(-s * M_SQRT1_2);
}

double gaussian_cdf_scaled(double s, double p) {
    check_prob(p);
    return gaussian_cdf(s / std::sqrt(p * (1.0 - p)));
}

double word_log_prob(int k, int weight, double p) {
    check_prob(p);
    check_width(k);
    if (weight < 0 || weight > k)
        throw ValidationError("word weight outside [0,k]");
    return weight * std::log2(p) + (k - weight) * std::log2(1.0 - p);
}

double log_odds_exponent(double a, double p) {
    check_prob(p);
    if (!(a > 0.0)) throw ValidationError("scale base a must be positive");
    if (p == 0.5) throw ValidationError("log-odds exponent undefined at p = 1/2");
    return std::log(a) / std::log(p / (1.0 - p));
}

double limit_atom(double a, double p) {
    if (!(p > 0.5) || !(p < 1.0))
        throw ValidationError("limit atom requires p in (1/2, 1)");
    return gaussian_cdf_scaled(-log_odds_exponent(a, p), p);
}

double match_prob(int k, double p) {
    check_prob(p);
    check_width(k);
    return std::pow(p * p + (1.0 - p) * (1.0 - p), k);
}

std::uint64_t fixed_weight_count(int k, int n) {
    check_width(k);
    if (n < 0 || n > k)
        throw ValidationError("weight outside [0,k]");
    if (n > k - n) n = k - n;
    unsigned __int128 r = 1;
    for (int i = 1; i <= n; ++i) {
        r = r * static_cast<unsigned>(k - n + i) / static_cast<unsigned>(i);
    }
    internal_check(r <= std::numeric_limits<std::uint64_t>::max(), "binomial overflow");
    return static_cast<std::uint64_t>(r);
}

WeightClassMass fixed_weight_mass(int k, int n, double p) {
    check_prob(p);
    // Pure log-gamma formula: meaningful far beyond the 64-bit word range,
    // and the local-limit comparison only bites at large k.
    if (k < 1 || k > 65536)
        throw ValidationError("weight class length must lie in [1,65536]");
    if (n < 0 || n > k)
        throw ValidationError("weight outside [0,k]");
    const double log_binom = std::lgamma(k + 1.0) - (std::lgamma(n + 1.0) + std::lgamma(k - n + 1.0));
    const double exact = std::exp(log_binom + n * std::log(p) + (k - n) * std::log(1.0 - p));
    const double var = k * p * (1.0 - p);
    const double dev = n - p * k;
    const double clt = std::exp(-dev * dev / (2.0 * var)) / std::sqrt(2.0 * M_PI * var);
    return WeightClassMass{exact, clt};
}

int weight_floor(int k, double p, double c) {
    check_prob(p);
    check_width(k);
    const double target = std::floor(p * k - c * std::sqrt(static_cast<double>(k)));
    if (target < 0.0 || target > static_cast<double>(k))
        throw ValidationError("weight target floor(p*k - c*sqrt(k)) lies outside [0,k]");
    return static_cast<int>(target);
}

namespace {

// log2 of the window budget before any integer rounding.
double rule_log2_windows(const RegimeRule& rule, double p, int k) {
    const double h = binary_entropy(p);
    switch (rule.kind) {
        case RegimeKind::EntropyScaled:
            if (!(rule.a > 0.0)) throw ValidationError("scale base a must be positive");
            return k * h + std::sqrt(static_cast<double>(k)) * std::log2(rule.a);
        case RegimeKind::EntropyExponentShifted:
            // Below -H(p) the budget rounds to zero windows; above that any
            // shift is evaluable and the integer/memory guards cap real scans.
            if (!(rule.delta > -h) || !(rule.delta < 1.0))
                throw ValidationError("entropy exponent shift delta must lie in (-H(p), 1)");
            return k * (h + rule.delta);
        case RegimeKind::ConditionalPoisson: {
            const int n = weight_floor(k, p, rule.c);
            if (!(rule.lambda > 0.0)) throw ValidationError("lambda must be positive");
            return std::log2(rule.lambda) - word_log_prob(k, n, p);
        }
        case RegimeKind::Explicit:
            if (rule.explicit_windows == 0) throw ValidationError("explicit window count must be >= 1");
            return std::log2(static_cast<double>(rule.explicit_windows));
    }
    internal_fail("unknown regime kind");
}

}  // namespace

double resolve_regime_log2(const RegimeRule& rule, double p, int k) {
    if (!(p > 0.0) || !(p < 1.0)) throw ValidationError("p must lie strictly inside (0,1)");
    if (k < 1) throw ValidationError("word length k must be >= 1");
    const double l2 = rule_log2_windows(rule, p, k);
    if (!std::isfinite(l2) || l2 > 65536.0)
        throw GuardError("window budget exponent out of range: log2(N) = " + std::to_string(l2));
    return l2;
}

double resolve_regime_log2(const RegimeRule& rule, const ModelParams& params) {
    return resolve_regime_log2(rule, params.p, params.k);
}

ResolvedRegime resolve_regime(const RegimeRule& rule, const ModelParams& params) {
    const double l2 = rule_log2_windows(rule, params.p, params.k);
    if (!(l2 <= 62.0))
        throw GuardError("window budget overflows the integer range: log2(N) = " + std::to_string(l2) + " > 62");

    ResolvedRegime out;
    out.target_weight = -1;
    out.realized_lambda = std::numeric_limits<double>::quiet_NaN();

    switch (rule.kind) {
        case RegimeKind::Explicit:
            out.n_windows = rule.explicit_windows;
            break;
        case RegimeKind::EntropyScaled:
        case RegimeKind::EntropyExponentShifted: {
            const long double n = roundl(exp2l(static_cast<long double>(l2)));
            if (n < 1.0L) throw ValidationError("window budget rounds below 1");
            out.n_windows = static_cast<std::uint64_t>(n);
            break;
        }
        case RegimeKind::ConditionalPoisson: {
            const int n_w = weight_floor(params.k, params.p, rule.c);
            out.target_weight = n_w;
            // word_prob in extended precision so the floor guard below is trustworthy
            const long double q = expl(n_w * logl(static_cast<long double>(params.p)) +
                                       (params.k - n_w) * logl(1.0L - static_cast<long double>(params.p)));
            const long double lambda = static_cast<long double>(rule.lambda);
            if (lambda < q)
                throw ValidationError("lambda below single-window match probability; window budget would be 0");
            long double cand = floorl(lambda / q);
            while (cand * q > lambda) cand -= 1.0L;
            while ((cand + 1.0L) * q <= lambda) cand += 1.0L;
            internal_check(cand * q <= lambda && lambda < (cand + 1.0L) * q,
                           "window budget floor guard failed");
            out.n_windows = static_cast<std::uint64_t>(cand);
            out.realized_lambda = static_cast<double>(cand * q);
            break;
        }
    }
    if (out.n_windows == 0) throw ValidationError("window budget must be >= 1");
    out.log2_windows = std::log2(static_cast<double>(out.n_windows));
    return out;
}

}  // namespace bitwords
