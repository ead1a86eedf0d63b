// Acceptance gate: one line per criterion, PASS/FAIL with the measured value
// and the pinned tolerance. Exit 0 only when every criterion passes. All
// randomized parts run from fixed seeds, so the gate is deterministic.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "bitwords/analytic.hpp"
#include "bitwords/bitseq.hpp"
#include "bitwords/counting.hpp"
#include "bitwords/errors.hpp"
#include "bitwords/exact.hpp"
#include "bitwords/experiments.hpp"
#include "bitwords/rng.hpp"
#include "bitwords/sampling.hpp"

using namespace bitwords;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buf[512];
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

std::size_t column_index(const ExperimentReport& report, const std::string& name) {
    for (std::size_t i = 0; i < report.columns.size(); ++i)
        if (report.columns[i] == name) return i;
    std::fprintf(stderr, "missing column %s\n", name.c_str());
    std::abort();
}

double real_cell(const ExperimentReport& report, std::size_t row, const std::string& name) {
    return report.rows[row][column_index(report, name)].r;
}

std::int64_t int_cell(const ExperimentReport& report, std::size_t row, const std::string& name) {
    return report.rows[row][column_index(report, name)].i;
}

// Exhaustive block model: every assignment of the word and all N blocks,
// probability-weighted, bucketed by the number of matching blocks.
std::vector<double> enumerate_block_model(int k, int n_blocks, double p) {
    const int bits = k * (n_blocks + 1);
    const std::uint64_t total = 1ull << bits;
    const std::uint64_t word_mask = (1ull << k) - 1;
    std::vector<double> weight_prob(bits + 1);
    for (int ones = 0; ones <= bits; ++ones)
        weight_prob[ones] = std::pow(p, ones) * std::pow(1.0 - p, bits - ones);
    std::vector<double> sum(n_blocks + 1, 0.0), comp(n_blocks + 1, 0.0);
    for (std::uint64_t u = 0; u < total; ++u) {
        const std::uint64_t word = u & word_mask;
        int matches = 0;
        for (int b = 1; b <= n_blocks; ++b)
            matches += ((u >> (b * k)) & word_mask) == word;
        const double prob = weight_prob[std::popcount(u)];
        const double y = prob - comp[matches];
        const double t = sum[matches] + y;
        comp[matches] = (t - sum[matches]) - y;
        sum[matches] = t;
    }
    return sum;
}

// 1. Exact pmf identical to brute-force enumeration of the block model.
Outcome criterion_exact_enumeration() {
    const double tol = 1e-12;
    double worst = 0.0;
    struct Case {
        int k, n;
        double p;
    };
    for (const Case c : {Case{2, 8, 0.7}, Case{3, 3, 0.3}, Case{4, 5, 0.6}, Case{6, 1, 0.42}}) {
        const std::vector<double> oracle = enumerate_block_model(c.k, c.n, c.p);
        const AnnealedSpec spec{c.k, c.p, BlockCount::from_exact(c.n), c.n};
        for (int n = 0; n <= c.n; ++n)
            worst = std::max(worst, std::fabs(annealed_pmf_at(spec, n) - oracle[n]));
    }
    return {worst <= tol, fmt("max |pmf - enumeration| = %.2e over 4 cases (tol %.0e)", worst, tol)};
}

// 2. Fixed-weight window law converges to Poisson: exact conditional binomial
// against Po(lambda_k), total variation vanishing in k.
Outcome criterion_conditional_convergence() {
    std::vector<double> tvs;
    for (int k : {16, 20, 24}) {
        const ModelParams params(0.6, k);
        const ResolvedRegime res =
            resolve_regime(RegimeRule::conditional_poisson(0.0, 1.0), params);
        const double n = static_cast<double>(res.n_windows);
        const double q = std::exp2(word_log_prob(k, res.target_weight, 0.6));
        CountDistribution bin;
        bin.pmf.assign(41, 0.0);
        double head = 0.0;
        for (int j = 0; j <= 40; ++j) {
            const double lc =
                std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
            bin.pmf[j] = std::exp(lc + j * std::log(q) + (n - j) * std::log1p(-q));
            head += bin.pmf[j];
        }
        bin.tail = std::max(0.0, 1.0 - head);
        tvs.push_back(tv_distance(bin, poisson_distribution(res.realized_lambda, 40)));
    }
    const bool monotone = tvs[0] > tvs[1] && tvs[1] > tvs[2];
    const bool small = tvs[2] < 1e-6;
    return {monotone && small,
            fmt("TV(count law, Poisson) = %.2e / %.2e / %.2e at k=16/20/24 "
                "(must decrease, final < 1e-06)",
                tvs[0], tvs[1], tvs[2])};
}

// 3. Entropy-scaled budgets leave the pinned atom at zero matches; shifting
// the entropy exponent tips the mass to all or nothing.
Outcome criterion_regime_dichotomy() {
    std::string detail;
    bool pass = true;

    struct Scaled {
        double p, a;
    };
    for (const Scaled s : {Scaled{0.6, 1.0}, Scaled{0.75, 1.5}}) {
        const RegimeRule rule = RegimeRule::entropy_scaled(s.a);
        const double atom = limit_atom(s.a, s.p);
        double prev_gap = 1.0;
        double gap = 1.0;
        for (int k : {256, 1024, 4096}) {
            const AnnealedSpec spec{k, s.p,
                                    BlockCount::from_log2(resolve_regime_log2(rule, s.p, k)), 0};
            prev_gap = gap;
            gap = std::fabs(annealed_pmf_at(spec, 0) - atom);
            pass = pass && gap < prev_gap;
        }
        pass = pass && gap < 0.02;
        detail += fmt("|pmf0 - atom|(k=4096) = %.4f at p=%.2f (tol 0.02, shrinking); ", gap, s.p);
    }

    const int k = 1024;
    const double below = annealed_pmf_at(
        {k, 0.6,
         BlockCount::from_log2(resolve_regime_log2(RegimeRule::entropy_exponent_shifted(-0.1), 0.6, k)),
         0},
        0);
    const double above = annealed_pmf_at(
        {k, 0.6,
         BlockCount::from_log2(resolve_regime_log2(RegimeRule::entropy_exponent_shifted(0.1), 0.6, k)),
         0},
        0);
    pass = pass && below > 0.99 && above < 1e-10;
    detail += fmt("shifted exponent: pmf0 = %.4f below / %.1e above (want > 0.99 / < 1e-10)",
                  below, above);
    return {pass, detail};
}

// 4. Sampled fixed-weight window counts stay close to Po(lambda_k) seed by
// seed, and the distance shrinks as k grows.
Outcome criterion_conditional_sampled() {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::ConditionalPoisson;
    spec.p = 0.6;
    spec.rule = RegimeRule::conditional_poisson(0.0, 1.0);
    spec.k_list = {20, 24};
    spec.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    spec.threads = 4;
    const ExperimentReport rep = run_conditional_poisson(spec);

    int ok20 = 0, ok24 = 0;
    double mean20 = 0.0, mean24 = 0.0;
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
        const double tv = real_cell(rep, r, "tv_to_lambda_k");
        if (int_cell(rep, r, "k") == 20) {
            ok20 += tv <= 0.05;
            mean20 += tv / 10.0;
        } else {
            ok24 += tv <= 0.05;
            mean24 += tv / 10.0;
        }
    }
    const bool pass = ok20 >= 8 && ok24 >= 8 && mean24 < mean20;
    return {pass, fmt("TV <= 0.05 for %d/10 seeds at k=20, %d/10 at k=24 (need >= 8); "
                      "mean TV %.5f -> %.5f (must shrink)",
                      ok20, ok24, mean20, mean24)};
}

// 5. Symmetric control: at p = 1/2 every word is typical, so pmf0 and pmf1
// both sit at 1/e.
Outcome criterion_symmetric_control() {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::ConditionalPoisson;
    spec.p = 0.5;
    spec.rule = RegimeRule::conditional_poisson(0.0, 1.0);
    spec.k_list = {20};
    spec.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    spec.threads = 4;
    const ExperimentReport rep = run_conditional_poisson(spec);

    const double e1 = std::exp(-1.0);
    int ok = 0;
    double worst = 0.0;
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
        const double d0 = std::fabs(real_cell(rep, r, "pmf0") - e1);
        const double d1 = std::fabs(real_cell(rep, r, "pmf1") - e1);
        worst = std::max({worst, d0, d1});
        ok += d0 <= 0.05 && d1 <= 0.05;
    }
    return {ok >= 8, fmt("|pmf0 - 1/e|, |pmf1 - 1/e| <= 0.05 for %d/10 seeds at p=0.5, k=20 "
                         "(need >= 8; worst %.4f)",
                         ok, worst)};
}

// 6. The unconditioned law is witnessed non-Poisson: the two-coordinate gap
// |pmf1 - lambda_hat e^(-lambda_hat)| stays above 0.2 and grows with k.
Outcome criterion_witness() {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::NonPoissonWitness;
    spec.p = 0.6;
    spec.rule = RegimeRule::entropy_scaled(1.0);
    spec.k_list = {256, 1024, 4096};
    const ExperimentReport rep = run_non_poisson_witness(spec);

    std::vector<double> gaps;
    for (std::size_t r = 0; r < rep.rows.size(); ++r) gaps.push_back(real_cell(rep, r, "gap"));
    const bool pass =
        gaps.size() == 3 && gaps[0] >= 0.2 && gaps[0] < gaps[1] && gaps[1] < gaps[2];
    return {pass, fmt("gap = %.4f / %.4f / %.4f at k=256/1024/4096 (all >= 0.2, growing)",
                      gaps[0], gaps[1], gaps[2])};
}

// 7. Mean identities and the realized-mean bracket of the window budget rule.
Outcome criterion_mean_identities() {
    const int k = 6;
    const double p = 0.58;
    const BlockCount blocks = BlockCount::from_exact(1000);
    const AnnealedSpec spec{k, p, blocks, 1000};

    double sum = 0.0;
    for (int n = 1000; n >= 0; --n) sum += n * annealed_pmf_at(spec, n);
    const double closed = annealed_mean(spec);
    const double mean_err = std::fabs(sum - closed) / closed;

    double mix = 0.0;
    double cond_err = 0.0;
    for (int m = 0; m <= k; ++m) {
        const double cond = conditional_mean_fixed_weight(k, m, p, blocks);
        const double direct = 1000.0 * std::pow(p, m) * std::pow(1.0 - p, k - m);
        cond_err = std::max(cond_err, std::fabs(cond - direct) / direct);
        mix += static_cast<double>(fixed_weight_count(k, m)) * std::pow(p, m) *
               std::pow(1.0 - p, k - m) * cond;
    }
    const double mix_err = std::fabs(mix - closed) / closed;

    RngCursor cursor(RngStream{2026, 77});
    int checked = 0;
    bool bracket = true;
    for (int trial = 0; trial < 100; ++trial) {
        const int kk = 8 + static_cast<int>(cursor.next_below(33));
        const double pp = 0.52 + 0.38 * cursor.next_uniform53();
        const double c = 0.5 * static_cast<double>(cursor.next_below(3));
        const double lambda = 0.5 + 0.5 * static_cast<double>(cursor.next_below(4));
        try {
            const ResolvedRegime res =
                resolve_regime(RegimeRule::conditional_poisson(c, lambda), ModelParams(pp, kk));
            const double q = std::exp2(word_log_prob(kk, res.target_weight, pp));
            ++checked;
            bracket = bracket && res.realized_lambda <= lambda * (1.0 + 1e-12) &&
                      res.realized_lambda > lambda - q * (1.0 + 1e-9);
        } catch (const GuardError&) {
        } catch (const ValidationError&) {
        }
    }
    const bool pass = mean_err <= 1e-8 && cond_err <= 1e-12 && mix_err <= 1e-12 &&
                      bracket && checked >= 60;
    return {pass, fmt("mean identity rel err %.1e (tol 1e-08), conditional %.1e, mixture %.1e "
                      "(tol 1e-12); realized lambda in (lambda-q, lambda] for %d/%d resolvable "
                      "configs",
                      mean_err, cond_err, mix_err, checked, checked)};
}

// 8. The certified distance bound is sound against simulation, decreases in k,
// and the symmetric joint factorizes exactly.
Outcome criterion_bound_soundness() {
    std::vector<double> bounds;
    for (int k : {12, 16, 20, 24})
        bounds.push_back(stein_chen_bound(k, 0.6, 0.0, 1.0, BoundMode::BruteForce).bound);
    bool decreasing = true;
    for (std::size_t i = 1; i < bounds.size(); ++i) decreasing = decreasing && bounds[i] < bounds[i - 1];

    bool exact_joint = true;
    for (int ell = 1; ell < 10; ++ell)
        exact_joint = exact_joint &&
                      indicator_product_mean_bruteforce_all(10, ell, 0.5) == std::ldexp(1.0, -20);

    ExperimentSpec spec;
    spec.kind = ExperimentKind::TvBound;
    spec.p = 0.6;
    spec.rule = RegimeRule::conditional_poisson(0.0, 1.0);
    spec.k_list = {12, 16};
    spec.seeds = {1};
    spec.trials = 200;
    spec.threads = 4;
    const ExperimentReport rep = run_tv_bound(spec);
    bool sound = true;
    for (std::size_t r = 0; r < rep.rows.size(); ++r) {
        const double bound = real_cell(rep, r, "bound");
        const double mc = real_cell(rep, r, "mc_tv");
        const double se = real_cell(rep, r, "mc_se");
        sound = sound && int_cell(rep, r, "sound") == 1 && bound >= mc - 3.0 * se;
    }
    return {decreasing && exact_joint && sound,
            fmt("bound %.2e -> %.2e -> %.2e -> %.2e at k=12/16/20/24 (decreasing); "
                "p=0.5 joint = 2^-2k exactly; bound >= mc - 3 se over 200 sequences",
                bounds[0], bounds[1], bounds[2], bounds[3])};
}

// 9. Closed-form overlap inequality dominates the exhaustive joint mean on
// both branches of the split.
Outcome criterion_overlap_inequality() {
    double worst_ratio = 0.0;
    for (const double p : {0.6, 0.75}) {
        for (const int k : {8, 12, 16, 20}) {
            const int n_k = weight_floor(k, p, 0.0);
            const double q = std::exp2(word_log_prob(k, n_k, p));
            const double mass = fixed_weight_mass(k, n_k, p).exact;
            const double root = std::sqrt(static_cast<double>(k));
            for (int ell = 1; ell < k; ++ell) {
                const double joint = indicator_product_mean_bruteforce(k, n_k, ell, p);
                const double majorant =
                    ell < root ? q * q * std::pow(1.0 - p, -ell)
                               : q * std::pow(p * p + (1.0 - p) * (1.0 - p), ell) / mass;
                worst_ratio = std::max(worst_ratio, joint / majorant);
            }
        }
    }
    return {worst_ratio <= 1.0 + 1e-12,
            fmt("max joint/majorant = %.6f over p in {0.6, 0.75}, k in {8..20}, all overlaps "
                "(must be <= 1)",
                worst_ratio)};
}

// 10. Window counting: worked example, random cross-check against a direct
// recount, dense/sparse agreement, and thread determinism.
Outcome criterion_counting() {
    // 0110110 scanned with k=3 gives windows 011,110,101,011,110.
    BitSequence worked(7);
    for (int i : {1, 2, 4, 5}) worked.set(i, true);
    const CountTable table = CountTable::build(worked, 3, 5);
    bool pass = table.count_value(0b110) == 2 && table.count_value(0b011) == 2 &&
                table.count_value(0b101) == 1 && table.distinct_keys() == 3;

    // Random sequences, every window value recounted directly.
    RngCursor cursor(RngStream{2026, 78});
    for (int trial = 0; trial < 50 && pass; ++trial) {
        const int k = 1 + static_cast<int>(cursor.next_below(4));
        const std::uint64_t n = 1 + cursor.next_below(64);
        const BitSequence seq =
            sample_sequence(RngStream{3000 + static_cast<std::uint64_t>(trial), 1},
                            n + static_cast<std::uint64_t>(k) - 1, 0.4 + 0.2 * cursor.next_uniform53());
        const CountTable t = CountTable::build(seq, k, n);
        std::vector<std::uint32_t> naive(1ull << k, 0);
        for (std::uint64_t j = 0; j < n; ++j) {
            std::uint64_t v = 0;
            for (int b = 0; b < k; ++b) v |= static_cast<std::uint64_t>(seq.get(j + b)) << b;
            ++naive[v];
        }
        std::uint64_t conserved = 0;
        for (std::uint64_t v = 0; v < (1ull << k); ++v) {
            pass = pass && t.count_value(v) == naive[v];
            conserved += t.count_value(v);
        }
        pass = pass && conserved == n;
    }

    // One large scan: identical tables across thread counts and backends.
    const BitSequence big = sample_sequence(RngStream{99, 1}, 2000000 + 17, 0.6);
    CountTable::BuildOptions opts;
    opts.threads = 1;
    const CountTable dense1 = CountTable::build(big, 18, 2000000, opts);
    opts.threads = 8;
    const CountTable dense8 = CountTable::build(big, 18, 2000000, opts);
    opts.memory_budget_bytes = 16ull << 20;  // below the 2^18 dense footprint at headroom
    const CountTable sparse8 = CountTable::build(big, 18, 2000000, opts);
    std::uint64_t mismatches = 0;
    for (std::uint64_t v = 0; v < (1ull << 18); ++v) {
        const std::uint32_t c = dense1.count_value(v);
        mismatches += c != dense8.count_value(v);
        mismatches += c != sparse8.count_value(v);
    }
    pass = pass && mismatches == 0;
    return {pass, fmt("worked example, 50 random recounts, dense/sparse x threads 1/8 identical "
                      "(%llu mismatches) at k=18, N=2e6",
                      static_cast<unsigned long long>(mismatches))};
}

// 11. Cross-seed concentration: per-coordinate pmf dispersion under the
// fixed-weight rule stays under the threshold and shrinks with k.
Outcome criterion_concentration() {
    ExperimentSpec spec;
    spec.kind = ExperimentKind::ConcentrationSweep;
    spec.p = 0.6;
    spec.rule = RegimeRule::conditional_poisson(0.0, 1.0);
    spec.k_list = {20, 24};
    spec.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    spec.threads = 4;
    spec.dispersion_threshold = 0.02;
    const ExperimentReport rep = run_concentration_sweep(spec);

    const double sd20 = real_cell(rep, 0, "max_sd");
    const double sd24 = real_cell(rep, 1, "max_sd");
    const bool verdicts = rep.rows[0][column_index(rep, "verdict")].s == "PASS" &&
                          rep.rows[1][column_index(rep, "verdict")].s == "PASS";
    const bool pass = verdicts && sd20 <= 0.02 && sd24 <= 0.02 && sd24 < sd20;
    return {pass, fmt("max cross-seed stddev %.5f at k=20, %.5f at k=24 over 10 seeds "
                      "(tol 0.02, must shrink)",
                      sd20, sd24)};
}

struct Criterion {
    const char* name;
    double cap_seconds;
    Outcome (*run)();
};

}  // namespace

int main() {
    const Criterion criteria[] = {
        {"exact pmf vs exhaustive enumeration", 10.0, criterion_exact_enumeration},
        {"fixed-weight law converges to Poisson", 5.0, criterion_conditional_convergence},
        {"entropy-budget atom and exponent dichotomy", 5.0, criterion_regime_dichotomy},
        {"sampled conditional counts near Poisson", 60.0, criterion_conditional_sampled},
        {"symmetric control at p=1/2", 60.0, criterion_symmetric_control},
        {"non-Poisson witness gap", 5.0, criterion_witness},
        {"mean identities and budget bracket", 5.0, criterion_mean_identities},
        {"distance bound soundness", 120.0, criterion_bound_soundness},
        {"overlap inequality", 30.0, criterion_overlap_inequality},
        {"window counting integrity", 10.0, criterion_counting},
        {"cross-seed concentration", 120.0, criterion_concentration},
    };

    int failures = 0;
    int index = 0;
    for (const Criterion& c : criteria) {
        ++index;
        const auto t0 = Clock::now();
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("threw: ") + e.what()};
        }
        const double elapsed = std::chrono::duration<double>(Clock::now() - t0).count();
        if (elapsed > c.cap_seconds) {
            outcome.pass = false;
            outcome.detail += fmt("; exceeded %.0fs runtime cap", c.cap_seconds);
        }
        failures += !outcome.pass;
        std::printf("[%2d/11] %s %s: %s [%.1fs]\n", index, outcome.pass ? "PASS" : "FAIL", c.name,
                    outcome.detail.c_str(), elapsed);
        std::fflush(stdout);
    }
    if (failures) {
        std::printf("acceptance: %d of 11 criteria FAILED\n", failures);
        return 1;
    }
    std::printf("acceptance: all 11 criteria passed\n");
    return 0;
}
