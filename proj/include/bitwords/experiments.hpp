#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bitwords/analytic.hpp"
#include "bitwords/counting.hpp"
#include "bitwords/exact.hpp"

namespace bitwords {

enum class ExperimentKind {
    AnnealedExact,
    AnnealedMC,
    QuenchedRegime,
    ConditionalPoisson,
    NonPoissonWitness,
    TvBound,
    ConcentrationSweep,
};

const char* experiment_kind_name(ExperimentKind kind);
ExperimentKind experiment_kind_from_name(const std::string& name);
const char* regime_kind_name(RegimeKind kind);

// Everything that affects report rows is an explicit field here; reports are a
// pure function of the spec, independent of thread count.
struct ExperimentSpec {
    ExperimentKind kind = ExperimentKind::AnnealedExact;
    double p = 0.6;
    RegimeRule rule = RegimeRule::entropy_scaled(1.0);
    std::vector<int> k_list;
    std::vector<std::uint64_t> seeds;
    std::uint64_t trials = 100000;  // AnnealedMC trials; TvBound sequence count
    int n_max = 8;
    int threads = 1;
    std::uint64_t memory_budget_bytes = 2ull << 30;
    double dispersion_threshold = 0.02;           // ConcentrationSweep verdict line
    BoundMode bound_mode = BoundMode::BruteForce;  // TvBound
    WordSupport support = WordSupport::FixedWeight;  // TvBound
};

// Throws ValidationError naming the violated requirement.
void validate_spec(const ExperimentSpec& spec);

struct Value {
    enum class Kind { Int, Real, Str };
    Kind kind = Kind::Int;
    std::int64_t i = 0;
    double r = 0.0;
    std::string s;

    static Value integer(std::int64_t v);
    static Value real(double v);
    static Value str(std::string v);
};

struct ExperimentReport {
    ExperimentSpec spec;
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;  // ordered by (k, seed)
    std::vector<std::string> notes;        // one entry per guard trip, in row order
    bool guard_tripped = false;

    // Telemetry; deliberately absent from CSV/JSON so outputs stay byte-stable.
    double wall_seconds = 0.0;
    std::uint64_t peak_memory_bytes = 0;
};

// Exact block-model pmf per k under an entropy-driven window rule.
ExperimentReport run_annealed_exact(const ExperimentSpec& spec);

// Simulated block-model counts per (k, seed) with TV against the exact pmf.
ExperimentReport run_annealed_mc(const ExperimentSpec& spec);

// Per-seed sliding-window pmf of a Ber(p)-random word, with cross-seed
// mean/stddev summary rows.
ExperimentReport run_quenched_regime(const ExperimentSpec& spec);

// Per-seed fixed-weight window-count law, exact over the whole weight class,
// with TV against Po(lambda_k) and Po(lambda).
ExperimentReport run_conditional_poisson(const ExperimentSpec& spec);

// Two-coordinate Poisson consistency check: lambda_hat = -ln pmf[0] and the
// gap |pmf[1] - lambda_hat e^(-lambda_hat)|. Exact block model when seeds are
// empty, per-seed sliding-window otherwise.
ExperimentReport run_non_poisson_witness(const ExperimentSpec& spec);

// Poisson-distance certificate per k, optionally with a Monte Carlo estimate
// of the true TV (trials = sequence count) and a bootstrap standard error.
ExperimentReport run_tv_bound(const ExperimentSpec& spec);

// Cross-seed dispersion of the per-seed pipeline behind the rule kind, with a
// PASS/FAIL verdict against dispersion_threshold.
ExperimentReport run_concentration_sweep(const ExperimentSpec& spec);

// Dispatch on spec.kind.
ExperimentReport run_experiment(const ExperimentSpec& spec);

}  // namespace bitwords
