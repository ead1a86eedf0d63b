#include "bitwords/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>

#include "bitwords/errors.hpp"
#include "bitwords/sampling.hpp"

namespace bitwords {

const char* experiment_kind_name(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::AnnealedExact: return "annealed-exact";
        case ExperimentKind::AnnealedMC: return "annealed-mc";
        case ExperimentKind::QuenchedRegime: return "quenched";
        case ExperimentKind::ConditionalPoisson: return "conditional-poisson";
        case ExperimentKind::NonPoissonWitness: return "non-poisson-witness";
        case ExperimentKind::TvBound: return "tv-bound";
        case ExperimentKind::ConcentrationSweep: return "concentration";
    }
    internal_fail("unhandled experiment kind");
}

ExperimentKind experiment_kind_from_name(const std::string& name) {
    static constexpr ExperimentKind kAll[] = {
        ExperimentKind::AnnealedExact,      ExperimentKind::AnnealedMC,
        ExperimentKind::QuenchedRegime,     ExperimentKind::ConditionalPoisson,
        ExperimentKind::NonPoissonWitness,  ExperimentKind::TvBound,
        ExperimentKind::ConcentrationSweep,
    };
    for (ExperimentKind kind : kAll)
        if (name == experiment_kind_name(kind)) return kind;
    throw ValidationError("unknown experiment kind: " + name);
}

const char* regime_kind_name(RegimeKind kind) {
    switch (kind) {
        case RegimeKind::EntropyScaled: return "entropy-scaled";
        case RegimeKind::EntropyExponentShifted: return "entropy-exponent-shifted";
        case RegimeKind::ConditionalPoisson: return "conditional-poisson";
        case RegimeKind::Explicit: return "explicit";
    }
    internal_fail("unhandled regime kind");
}

Value Value::integer(std::int64_t v) {
    Value out;
    out.kind = Kind::Int;
    out.i = v;
    return out;
}

Value Value::real(double v) {
    Value out;
    out.kind = Kind::Real;
    out.r = v;
    return out;
}

Value Value::str(std::string v) {
    Value out;
    out.kind = Kind::Str;
    out.s = std::move(v);
    return out;
}

void validate_spec(const ExperimentSpec& spec) {
    if (spec.k_list.empty()) throw ValidationError("k_list must be nonempty");
    // Formula-only kinds never materialize a word or a table, so k may exceed
    // the 64-bit word range there.
    const bool formula_only =
        spec.kind == ExperimentKind::AnnealedExact ||
        (spec.kind == ExperimentKind::NonPoissonWitness && spec.seeds.empty());
    ModelParams probe(spec.p, 1);
    for (int k : spec.k_list) {
        if (formula_only) {
            if (k < 1 || k > 65536)
                throw ValidationError("word length k must lie in [1, 65536] for exact evaluation");
        } else {
            ModelParams params(spec.p, k);
        }
    }
    if (spec.n_max < 0) throw ValidationError("n_max must be >= 0");
    if (spec.threads < 1 || spec.threads > 1024)
        throw ValidationError("threads must lie in [1, 1024]");
    if (!(spec.dispersion_threshold > 0.0))
        throw ValidationError("dispersion threshold must be positive");

    const RegimeKind rk = spec.rule.kind;
    switch (rk) {
        case RegimeKind::EntropyScaled:
            if (!(spec.rule.a > 0.0)) throw ValidationError("scale base a must be positive");
            break;
        case RegimeKind::EntropyExponentShifted: {
            const double h = binary_entropy(spec.p);
            if (!(spec.rule.delta > -h) || !(spec.rule.delta < 1.0))
                throw ValidationError("exponent shift delta must lie in (-H(p), 1)");
            break;
        }
        case RegimeKind::ConditionalPoisson:
            if (!(spec.rule.lambda > 0.0)) throw ValidationError("lambda must be positive");
            break;
        case RegimeKind::Explicit:
            if (spec.rule.explicit_windows == 0)
                throw ValidationError("explicit window count must be >= 1");
            break;
    }

    const bool entropy_rule =
        rk == RegimeKind::EntropyScaled || rk == RegimeKind::EntropyExponentShifted;
    switch (spec.kind) {
        case ExperimentKind::AnnealedExact:
            if (!entropy_rule)
                throw ValidationError("annealed-exact needs an entropy-driven window rule");
            break;
        case ExperimentKind::AnnealedMC:
            if (spec.trials < 1) throw ValidationError("trials must be >= 1");
            if (spec.seeds.empty()) throw ValidationError("seeds must be nonempty");
            break;
        case ExperimentKind::QuenchedRegime:
            if (spec.seeds.empty()) throw ValidationError("seeds must be nonempty");
            break;
        case ExperimentKind::ConditionalPoisson:
            if (rk != RegimeKind::ConditionalPoisson)
                throw ValidationError("conditional-poisson needs the conditional-poisson rule");
            if (spec.seeds.empty()) throw ValidationError("seeds must be nonempty");
            break;
        case ExperimentKind::NonPoissonWitness:
            if (!entropy_rule)
                throw ValidationError("non-poisson-witness needs an entropy-driven window rule");
            break;
        case ExperimentKind::TvBound:
            if (rk != RegimeKind::ConditionalPoisson)
                throw ValidationError("tv-bound needs the conditional-poisson rule");
            if (!spec.seeds.empty() && (spec.trials < 2 || spec.trials > 100000))
                throw ValidationError("tv-bound sequence count must lie in [2, 100000]");
            break;
        case ExperimentKind::ConcentrationSweep:
            if (spec.seeds.size() < 10)
                throw ValidationError("concentration sweep needs at least 10 seeds");
            break;
    }
}

namespace {

constexpr std::uint64_t kDomainSequence = 1;
constexpr std::uint64_t kDomainBlocks = 2;
constexpr std::uint64_t kDomainTvSequences = 3;
constexpr std::uint64_t kDomainBootstrap = 4;

std::uint64_t domain_stream(std::uint64_t domain, int k) {
    return (domain << 56) | static_cast<std::uint64_t>(k);
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// Runs fn(0..n-1) on up to `threads` workers. Task results must be stored by
// index by the callers so merge order never depends on scheduling.
void parallel_tasks(int threads, std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t use = std::min<std::size_t>(std::max(threads, 1), n);
    if (use <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(use);
    for (std::size_t t = 0; t < use; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

int inner_threads(int threads, std::size_t n_tasks) {
    if (n_tasks == 0) return 1;
    return std::max<int>(1, threads / static_cast<int>(std::min<std::size_t>(n_tasks, 1u << 20)));
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double sample_stddev(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

struct QuenchedRun {
    CountDistribution dist;
    std::uint64_t table_bytes = 0;
};

QuenchedRun quenched_all_words_run(double p, int k, std::uint64_t n_windows, std::uint64_t seed,
                                   int n_max, std::uint64_t budget, int threads) {
    const RngStream stream{seed, domain_stream(kDomainSequence, k)};
    const BitSequence seq = sample_sequence(stream, n_windows + static_cast<std::uint64_t>(k) - 1, p);
    CountTable::BuildOptions opt;
    opt.threads = threads;
    opt.memory_budget_bytes = budget;
    const CountTable table = CountTable::build(seq, k, n_windows, opt);
    QuenchedRun out;
    out.table_bytes = table.memory_bytes();
    out.dist = quenched_distribution_all_words(table, p, n_max);
    return out;
}

QuenchedRun quenched_fixed_weight_run(double p, int k, int weight, std::uint64_t n_windows,
                                      std::uint64_t seed, int n_max, std::uint64_t budget,
                                      int threads) {
    const RngStream stream{seed, domain_stream(kDomainSequence, k)};
    const BitSequence seq = sample_sequence(stream, n_windows + static_cast<std::uint64_t>(k) - 1, p);
    CountTable::BuildOptions opt;
    opt.threads = threads;
    opt.memory_budget_bytes = budget;
    const CountTable table = CountTable::build(seq, k, n_windows, opt);
    QuenchedRun out;
    out.table_bytes = table.memory_bytes();
    out.dist = quenched_distribution_fixed_weight(table, weight, n_max);
    return out;
}

struct Resolved {
    bool ok = false;
    ResolvedRegime regime{};
    std::string note;
};

Resolved try_resolve(const RegimeRule& rule, const ModelParams& params) {
    Resolved out;
    try {
        out.regime = resolve_regime(rule, params);
        out.ok = true;
    } catch (const GuardError& e) {
        out.note = e.what();
    }
    return out;
}

std::string k_note(int k, const std::string& message) {
    return "k=" + std::to_string(k) + ": " + message;
}

void push_pmf(std::vector<Value>& row, const CountDistribution& dist) {
    for (double x : dist.pmf) row.push_back(Value::real(x));
    row.push_back(Value::real(dist.tail));
}

void append_pmf_columns(std::vector<std::string>& columns, int n_max) {
    for (int n = 0; n <= n_max; ++n) columns.push_back("pmf" + std::to_string(n));
    columns.push_back("tail");
}

CountDistribution empirical_distribution(const std::vector<std::uint32_t>& counts, int n_max) {
    CountDistribution d;
    d.pmf.assign(static_cast<std::size_t>(n_max) + 1, 0.0);
    std::uint64_t beyond = 0;
    for (std::uint32_t c : counts) {
        if (c <= static_cast<std::uint32_t>(n_max))
            d.pmf[c] += 1.0;
        else
            ++beyond;
    }
    const double inv = 1.0 / static_cast<double>(counts.size());
    for (double& x : d.pmf) x *= inv;
    d.tail = static_cast<double>(beyond) * inv;
    return d;
}

void finish(ExperimentReport& report, const Timer& timer) {
    report.wall_seconds = timer.elapsed();
}

}  // namespace

ExperimentReport run_annealed_exact(const ExperimentSpec& spec) {
    Timer timer;
    validate_spec(spec);
    ExperimentReport report;
    report.spec = spec;
    report.columns = {"k", "status", "log2_windows", "log2_mean"};
    append_pmf_columns(report.columns, spec.n_max);
    report.columns.push_back("ref_pmf0_limit");

    for (int k : spec.k_list) {
        std::vector<Value> row;
        row.push_back(Value::integer(k));
        BlockCount blocks = BlockCount::from_exact(1);
        bool ok = true;
        std::string note;
        try {
            blocks = BlockCount::from_log2(resolve_regime_log2(spec.rule, spec.p, k));
        } catch (const GuardError& e) {
            ok = false;
            note = e.what();
        }
        if (!ok) {
            row.push_back(Value::str("overflow"));
            while (row.size() < report.columns.size()) row.push_back(Value::str(""));
            report.rows.push_back(std::move(row));
            report.notes.push_back(k_note(k, note));
            report.guard_tripped = true;
            continue;
        }
        const AnnealedSpec aspec{k, spec.p, blocks, spec.n_max};
        const CountDistribution dist = annealed_distribution(aspec);
        row.push_back(Value::str("ok"));
        row.push_back(Value::real(blocks.log2_value()));
        row.push_back(Value::real(blocks.log2_value() +
                                  k * std::log2(spec.p * spec.p + (1.0 - spec.p) * (1.0 - spec.p))));
        push_pmf(row, dist);
        if (spec.rule.kind == RegimeKind::EntropyScaled && spec.p > 0.5)
            row.push_back(Value::real(limit_atom(spec.rule.a, spec.p)));
        else if (spec.rule.kind == RegimeKind::EntropyExponentShifted)
            row.push_back(Value::real(spec.rule.delta < 0.0 ? 1.0 : 0.0));
        else
            row.push_back(Value::str(""));
        report.rows.push_back(std::move(row));
    }
    finish(report, timer);
    return report;
}

ExperimentReport run_annealed_mc(const ExperimentSpec& spec) {
    Timer timer;
    validate_spec(spec);
    ExperimentReport report;
    report.spec = spec;
    report.columns = {"k", "seed", "n_windows", "trials", "mean_exact", "mean_emp", "tv_to_exact"};
    append_pmf_columns(report.columns, spec.n_max);

    struct PerK {
        int k;
        Resolved res;
        CountDistribution exact;
    };
    std::vector<PerK> per_k;
    for (int k : spec.k_list) {
        PerK entry;
        entry.k = k;
        entry.res = try_resolve(spec.rule, ModelParams(spec.p, k));
        if (entry.res.ok) {
            const AnnealedSpec aspec{k, spec.p, BlockCount::from_exact(entry.res.regime.n_windows),
                                     spec.n_max};
            entry.exact = annealed_distribution(aspec);
        }
        per_k.push_back(std::move(entry));
    }

    struct Task {
        std::size_t k_index;
        std::size_t seed_index;
    };
    std::vector<Task> tasks;
    for (std::size_t ki = 0; ki < per_k.size(); ++ki) {
        if (!per_k[ki].res.ok) continue;
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) tasks.push_back({ki, si});
    }
    std::vector<std::vector<Value>> task_rows(tasks.size());
    parallel_tasks(spec.threads, tasks.size(), [&](std::size_t t) {
        const PerK& entry = per_k[tasks[t].k_index];
        const std::uint64_t seed = spec.seeds[tasks[t].seed_index];
        const RngStream stream{seed, domain_stream(kDomainBlocks, entry.k)};
        const std::vector<std::uint32_t> counts = simulate_nonintersecting(
            stream, entry.k, entry.res.regime.n_windows, spec.p, spec.trials);
        const CountDistribution emp = empirical_distribution(counts, spec.n_max);
        double total = 0.0;
        for (std::uint32_t c : counts) total += static_cast<double>(c);
        std::vector<Value> row;
        row.push_back(Value::integer(entry.k));
        row.push_back(Value::integer(static_cast<std::int64_t>(seed)));
        row.push_back(Value::integer(static_cast<std::int64_t>(entry.res.regime.n_windows)));
        row.push_back(Value::integer(static_cast<std::int64_t>(spec.trials)));
        row.push_back(Value::real(static_cast<double>(entry.res.regime.n_windows) *
                                  match_prob(entry.k, spec.p)));
        row.push_back(Value::real(total / static_cast<double>(counts.size())));
        row.push_back(Value::real(tv_distance(emp, entry.exact)));
        push_pmf(row, emp);
        task_rows[t] = std::move(row);
    });

    std::size_t t = 0;
    for (const PerK& entry : per_k) {
        if (!entry.res.ok) {
            report.notes.push_back(k_note(entry.k, entry.res.note));
            report.guard_tripped = true;
            continue;
        }
        for (std::size_t si = 0; si < spec.seeds.size(); ++si)
            report.rows.push_back(std::move(task_rows[t++]));
    }
    finish(report, timer);
    return report;
}

ExperimentReport run_quenched_regime(const ExperimentSpec& spec) {
    Timer timer;
    validate_spec(spec);
    ExperimentReport report;
    report.spec = spec;
    report.columns = {"k", "seed", "stat", "n_windows"};
    append_pmf_columns(report.columns, spec.n_max);

    struct PerK {
        int k;
        Resolved res;
    };
    std::vector<PerK> per_k;
    for (int k : spec.k_list) per_k.push_back({k, try_resolve(spec.rule, ModelParams(spec.p, k))});

    struct Task {
        std::size_t k_index;
        std::size_t seed_index;
    };
    std::vector<Task> tasks;
    for (std::size_t ki = 0; ki < per_k.size(); ++ki) {
        if (!per_k[ki].res.ok) continue;
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) tasks.push_back({ki, si});
    }
    std::vector<CountDistribution> dists(tasks.size());
    std::vector<std::string> task_notes(tasks.size());
    std::atomic<std::uint64_t> peak{0};
    const int inner = inner_threads(spec.threads, tasks.size());
    parallel_tasks(spec.threads, tasks.size(), [&](std::size_t t) {
        const PerK& entry = per_k[tasks[t].k_index];
        const std::uint64_t seed = spec.seeds[tasks[t].seed_index];
        try {
            QuenchedRun run =
                quenched_all_words_run(spec.p, entry.k, entry.res.regime.n_windows, seed,
                                       spec.n_max, spec.memory_budget_bytes, inner);
            dists[t] = std::move(run.dist);
            std::uint64_t seen = peak.load();
            while (run.table_bytes > seen && !peak.compare_exchange_weak(seen, run.table_bytes)) {
            }
        } catch (const GuardError& e) {
            task_notes[t] = e.what();
        }
    });
    report.peak_memory_bytes = peak.load();

    std::size_t t = 0;
    for (const PerK& entry : per_k) {
        if (!entry.res.ok) {
            report.notes.push_back(k_note(entry.k, entry.res.note));
            report.guard_tripped = true;
            continue;
        }
        const std::size_t base = t;
        bool k_ok = true;
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
            if (!task_notes[base + si].empty()) {
                report.notes.push_back(k_note(entry.k, task_notes[base + si]));
                report.guard_tripped = true;
                k_ok = false;
                break;
            }
        }
        t += spec.seeds.size();
        if (!k_ok) continue;
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
            const CountDistribution& d = dists[base + si];
            std::vector<Value> row;
            row.push_back(Value::integer(entry.k));
            row.push_back(Value::integer(static_cast<std::int64_t>(spec.seeds[si])));
            row.push_back(Value::str("seed"));
            row.push_back(Value::integer(static_cast<std::int64_t>(entry.res.regime.n_windows)));
            push_pmf(row, d);
            report.rows.push_back(std::move(row));
        }
        const auto summary_row = [&](const char* stat,
                                     const std::function<double(std::vector<double>&)>& reduce) {
            std::vector<Value> row;
            row.push_back(Value::integer(entry.k));
            row.push_back(Value::integer(0));
            row.push_back(Value::str(stat));
            row.push_back(Value::integer(static_cast<std::int64_t>(entry.res.regime.n_windows)));
            for (int n = 0; n <= spec.n_max + 1; ++n) {
                std::vector<double> xs;
                for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
                    const CountDistribution& d = dists[base + si];
                    xs.push_back(n <= spec.n_max ? d.pmf[n] : d.tail);
                }
                row.push_back(Value::real(reduce(xs)));
            }
            report.rows.push_back(std::move(row));
        };
        summary_row("mean", [](std::vector<double>& xs) { return mean_of(xs); });
        if (spec.seeds.size() >= 2)
            summary_row("stddev", [](std::vector<double>& xs) { return sample_stddev(xs); });
    }
    finish(report, timer);
    return report;
}

ExperimentReport run_conditional_poisson(const ExperimentSpec& spec) {
    Timer timer;
    validate_spec(spec);
    ExperimentReport report;
    report.spec = spec;
    report.columns = {"k",  "seed", "n_k",  "N_k",  "lambda_k", "tv_to_lambda_k",
                      "tv_to_lambda", "pmf0", "pmf1", "pmf2", "pmf3", "tail"};
    const int n_head = std::max(spec.n_max, 8);

    struct PerK {
        int k;
        Resolved res;
        CountDistribution po_lambda_k;
        CountDistribution po_lambda;
    };
    std::vector<PerK> per_k;
    for (int k : spec.k_list) {
        PerK entry;
        entry.k = k;
        entry.res = try_resolve(spec.rule, ModelParams(spec.p, k));
        if (entry.res.ok && entry.res.regime.n_windows > 20000000ull) {
            entry.res.ok = false;
            entry.res.note = "window count exceeds the 2e7 sliding-scan guard";
        }
        if (entry.res.ok) {
            entry.po_lambda_k = poisson_distribution(entry.res.regime.realized_lambda, n_head);
            entry.po_lambda = poisson_distribution(spec.rule.lambda, n_head);
        }
        per_k.push_back(std::move(entry));
    }

    struct Task {
        std::size_t k_index;
        std::size_t seed_index;
    };
    std::vector<Task> tasks;
    for (std::size_t ki = 0; ki < per_k.size(); ++ki) {
        if (!per_k[ki].res.ok) continue;
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) tasks.push_back({ki, si});
    }
    std::vector<std::vector<Value>> task_rows(tasks.size());
    std::atomic<std::uint64_t> peak{0};
    const int inner = inner_threads(spec.threads, tasks.size());
    parallel_tasks(spec.threads, tasks.size(), [&](std::size_t t) {
        const PerK& entry = per_k[tasks[t].k_index];
        const std::uint64_t seed = spec.seeds[tasks[t].seed_index];
        QuenchedRun run = quenched_fixed_weight_run(
            spec.p, entry.k, entry.res.regime.target_weight, entry.res.regime.n_windows, seed,
            n_head, spec.memory_budget_bytes, inner);
        std::uint64_t seen = peak.load();
        while (run.table_bytes > seen && !peak.compare_exchange_weak(seen, run.table_bytes)) {
        }
        const double tv_k = tv_distance(run.dist, entry.po_lambda_k);
        const double tv_l = tv_distance(run.dist, entry.po_lambda);
        std::vector<Value> row;
        row.push_back(Value::integer(entry.k));
        row.push_back(Value::integer(static_cast<std::int64_t>(seed)));
        row.push_back(Value::integer(entry.res.regime.target_weight));
        row.push_back(Value::integer(static_cast<std::int64_t>(entry.res.regime.n_windows)));
        row.push_back(Value::real(entry.res.regime.realized_lambda));
        row.push_back(Value::real(tv_k));
        row.push_back(Value::real(tv_l));
        double head = 0.0;
        for (int n = 0; n <= 3; ++n) {
            row.push_back(Value::real(run.dist.pmf[n]));
            head += run.dist.pmf[n];
        }
        row.push_back(Value::real(std::max(0.0, 1.0 - head)));
        task_rows[t] = std::move(row);
    });

    std::size_t t = 0;
    for (const PerK& entry : per_k) {
        if (!entry.res.ok) {
            report.notes.push_back(k_note(entry.k, entry.res.note));
            report.guard_tripped = true;
            continue;
        }
        for (std::size_t si = 0; si < spec.seeds.size(); ++si)
            report.rows.push_back(std::move(task_rows[t++]));
    }
    report.peak_memory_bytes = peak.load();
    finish(report, timer);
    return report;
}

ExperimentReport run_non_poisson_witness(const ExperimentSpec& spec) {
    Timer timer;
    validate_spec(spec);
    ExperimentReport report;
    report.spec = spec;
    report.columns = {"k",    "seed",       "mode", "log2_windows",     "pmf0",
                      "pmf1", "lambda_hat", "poisson_pmf1_ref", "gap"};

    const auto witness_cells = [](std::vector<Value>& row, double pmf0, double pmf1) {
        row.push_back(Value::real(pmf0));
        row.push_back(Value::real(pmf1));
        if (pmf0 > 0.0) {
            const double lambda_hat = -std::log(pmf0);
            const double ref = lambda_hat * pmf0;
            row.push_back(Value::real(lambda_hat));
            row.push_back(Value::real(ref));
            row.push_back(Value::real(std::abs(pmf1 - ref)));
        } else {
            row.push_back(Value::str(""));
            row.push_back(Value::real(0.0));
            row.push_back(Value::real(pmf1));
        }
    };

    if (spec.seeds.empty()) {
        for (int k : spec.k_list) {
            std::vector<Value> row;
            row.push_back(Value::integer(k));
            row.push_back(Value::integer(0));
            row.push_back(Value::str("annealed"));
            BlockCount blocks = BlockCount::from_exact(1);
            bool ok = true;
            std::string note;
            try {
                blocks = BlockCount::from_log2(resolve_regime_log2(spec.rule, spec.p, k));
            } catch (const GuardError& e) {
                ok = false;
                note = e.what();
            }
            if (!ok) {
                for (std::size_t i = 3; i < report.columns.size(); ++i)
                    row.push_back(Value::str(""));
                report.rows.push_back(std::move(row));
                report.notes.push_back(k_note(k, note));
                report.guard_tripped = true;
                continue;
            }
            const AnnealedSpec aspec{k, spec.p, blocks, 1};
            row.push_back(Value::real(blocks.log2_value()));
            witness_cells(row, annealed_pmf_at(aspec, 0), annealed_pmf_at(aspec, 1));
            report.rows.push_back(std::move(row));
        }
        finish(report, timer);
        return report;
    }

    struct PerK {
        int k;
        Resolved res;
    };
    std::vector<PerK> per_k;
    for (int k : spec.k_list) per_k.push_back({k, try_resolve(spec.rule, ModelParams(spec.p, k))});
    struct Task {
        std::size_t k_index;
        std::size_t seed_index;
    };
    std::vector<Task> tasks;
    for (std::size_t ki = 0; ki < per_k.size(); ++ki) {
        if (!per_k[ki].res.ok) continue;
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) tasks.push_back({ki, si});
    }
    std::vector<CountDistribution> dists(tasks.size());
    std::atomic<std::uint64_t> peak{0};
    const int inner = inner_threads(spec.threads, tasks.size());
    parallel_tasks(spec.threads, tasks.size(), [&](std::size_t t) {
        const PerK& entry = per_k[tasks[t].k_index];
        const std::uint64_t seed = spec.seeds[tasks[t].seed_index];
        QuenchedRun run = quenched_all_words_run(spec.p, entry.k, entry.res.regime.n_windows, seed,
                                                 std::max(spec.n_max, 1), spec.memory_budget_bytes,
                                                 inner);
        dists[t] = std::move(run.dist);
        std::uint64_t seen = peak.load();
        while (run.table_bytes > seen && !peak.compare_exchange_weak(seen, run.table_bytes)) {
        }
    });
    report.peak_memory_bytes = peak.load();

    std::size_t t = 0;
    for (const PerK& entry : per_k) {
        if (!entry.res.ok) {
            report.notes.push_back(k_note(entry.k, entry.res.note));
            report.guard_tripped = true;
            continue;
        }
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
            const CountDistribution& d = dists[t++];
            std::vector<Value> row;
            row.push_back(Value::integer(entry.k));
            row.push_back(Value::integer(static_cast<std::int64_t>(spec.seeds[si])));
            row.push_back(Value::str("quenched"));
            row.push_back(Value::real(entry.res.regime.log2_windows));
            witness_cells(row, d.pmf[0], d.pmf[1]);
            report.rows.push_back(std::move(row));
        }
    }
    finish(report, timer);
    return report;
}

ExperimentReport run_tv_bound(const ExperimentSpec& spec) {
    Timer timer;
    validate_spec(spec);
    ExperimentReport report;
    report.spec = spec;
    report.columns = {"k",          "n_k",        "n_windows", "lambda_k",
                      "word_prob",  "term_self",  "term_edges", "bound",
                      "sequences",  "mc_tv",      "mc_se",      "sound"};
    const int n_head = std::max(spec.n_max, 8);

    struct PerK {
        int k;
        bool ok = false;
        std::string note;
        TvBoundReport bound;
        CountDistribution po;
        std::vector<CountDistribution> seq_dists;
    };
    std::vector<PerK> per_k;
    for (int k : spec.k_list) {
        PerK entry;
        entry.k = k;
        try {
            entry.bound = stein_chen_bound(k, spec.p, spec.rule.c, spec.rule.lambda,
                                           spec.bound_mode, spec.support);
            entry.ok = true;
        } catch (const GuardError& e) {
            entry.note = e.what();
        }
        if (entry.ok && !spec.seeds.empty() && entry.bound.n_windows > 20000000ull) {
            entry.ok = false;
            entry.note = "window count exceeds the 2e7 sliding-scan guard";
        }
        if (entry.ok) entry.po = poisson_distribution(entry.bound.lambda_k, n_head);
        per_k.push_back(std::move(entry));
    }

    const std::uint64_t n_sequences = spec.seeds.empty() ? 0 : spec.trials;
    struct Task {
        std::size_t k_index;
        std::uint64_t sequence;
    };
    std::vector<Task> tasks;
    for (std::size_t ki = 0; ki < per_k.size(); ++ki) {
        if (!per_k[ki].ok) continue;
        per_k[ki].seq_dists.resize(n_sequences);
        for (std::uint64_t s = 0; s < n_sequences; ++s) tasks.push_back({ki, s});
    }
    std::atomic<std::uint64_t> peak{0};
    const int inner = inner_threads(spec.threads, tasks.size());
    parallel_tasks(spec.threads, tasks.size(), [&](std::size_t t) {
        PerK& entry = per_k[tasks[t].k_index];
        const RngStream base{spec.seeds[0], domain_stream(kDomainTvSequences, entry.k)};
        const RngStream stream = base.child(tasks[t].sequence);
        const BitSequence seq = sample_sequence(
            stream, entry.bound.n_windows + static_cast<std::uint64_t>(entry.k) - 1, spec.p);
        CountTable::BuildOptions opt;
        opt.threads = inner;
        opt.memory_budget_bytes = spec.memory_budget_bytes;
        const CountTable table = CountTable::build(seq, entry.k, entry.bound.n_windows, opt);
        std::uint64_t bytes = table.memory_bytes();
        std::uint64_t seen = peak.load();
        while (bytes > seen && !peak.compare_exchange_weak(seen, bytes)) {
        }
        entry.seq_dists[tasks[t].sequence] =
            spec.support == WordSupport::FixedWeight
                ? quenched_distribution_fixed_weight(table, entry.bound.target_weight, n_head)
                : quenched_distribution_all_words(table, spec.p, n_head);
    });
    report.peak_memory_bytes = peak.load();

    const auto mean_dist = [&](const std::vector<CountDistribution>& ds,
                               const std::vector<std::uint64_t>& picks) {
        CountDistribution m;
        m.pmf.assign(static_cast<std::size_t>(n_head) + 1, 0.0);
        m.tail = 0.0;
        const double inv = 1.0 / static_cast<double>(picks.size());
        for (std::uint64_t idx : picks) {
            const CountDistribution& d = ds[idx];
            for (int n = 0; n <= n_head; ++n) m.pmf[n] += d.pmf[n] * inv;
            m.tail += d.tail * inv;
        }
        return m;
    };

    for (PerK& entry : per_k) {
        if (!entry.ok) {
            report.notes.push_back(k_note(entry.k, entry.note));
            report.guard_tripped = true;
            continue;
        }
        std::vector<Value> row;
        row.push_back(Value::integer(entry.k));
        if (spec.support == WordSupport::FixedWeight)
            row.push_back(Value::integer(entry.bound.target_weight));
        else
            row.push_back(Value::str(""));
        row.push_back(Value::integer(static_cast<std::int64_t>(entry.bound.n_windows)));
        row.push_back(Value::real(entry.bound.lambda_k));
        row.push_back(Value::real(entry.bound.word_prob));
        row.push_back(Value::real(entry.bound.term_self));
        row.push_back(Value::real(entry.bound.term_edges));
        row.push_back(Value::real(entry.bound.bound));
        row.push_back(Value::integer(static_cast<std::int64_t>(n_sequences)));
        if (n_sequences == 0) {
            row.push_back(Value::str(""));
            row.push_back(Value::str(""));
            row.push_back(Value::str(""));
        } else {
            std::vector<std::uint64_t> all(n_sequences);
            for (std::uint64_t s = 0; s < n_sequences; ++s) all[s] = s;
            const double est = tv_distance(mean_dist(entry.seq_dists, all), entry.po);

            constexpr int kResamples = 200;
            RngCursor cursor(RngStream{spec.seeds[0], domain_stream(kDomainBootstrap, entry.k)});
            std::vector<double> tvs;
            tvs.reserve(kResamples);
            std::vector<std::uint64_t> picks(n_sequences);
            for (int b = 0; b < kResamples; ++b) {
                for (std::uint64_t& idx : picks) idx = cursor.next_below(n_sequences);
                tvs.push_back(tv_distance(mean_dist(entry.seq_dists, picks), entry.po));
            }
            const double se = sample_stddev(tvs);
            row.push_back(Value::real(est));
            row.push_back(Value::real(se));
            row.push_back(Value::integer(entry.bound.bound >= est - 3.0 * se ? 1 : 0));
        }
        report.rows.push_back(std::move(row));
    }
    finish(report, timer);
    return report;
}

ExperimentReport run_concentration_sweep(const ExperimentSpec& spec) {
    Timer timer;
    validate_spec(spec);
    ExperimentReport report;
    report.spec = spec;
    report.columns = {"k", "n_seeds", "n_windows"};
    for (int n = 0; n <= spec.n_max; ++n) report.columns.push_back("sd_pmf" + std::to_string(n));
    report.columns.push_back("sd_tail");
    report.columns.push_back("sd_tv");
    report.columns.push_back("max_sd");
    report.columns.push_back("threshold");
    report.columns.push_back("verdict");
    const bool conditional = spec.rule.kind == RegimeKind::ConditionalPoisson;
    const int n_head = conditional ? std::max(spec.n_max, 8) : spec.n_max;

    struct PerK {
        int k;
        Resolved res;
        CountDistribution po;
    };
    std::vector<PerK> per_k;
    for (int k : spec.k_list) {
        PerK entry;
        entry.k = k;
        entry.res = try_resolve(spec.rule, ModelParams(spec.p, k));
        if (entry.res.ok && entry.res.regime.n_windows > 20000000ull) {
            entry.res.ok = false;
            entry.res.note = "window count exceeds the 2e7 sliding-scan guard";
        }
        if (entry.res.ok && conditional)
            entry.po = poisson_distribution(entry.res.regime.realized_lambda, n_head);
        per_k.push_back(std::move(entry));
    }

    struct Task {
        std::size_t k_index;
        std::size_t seed_index;
    };
    std::vector<Task> tasks;
    for (std::size_t ki = 0; ki < per_k.size(); ++ki) {
        if (!per_k[ki].res.ok) continue;
        for (std::size_t si = 0; si < spec.seeds.size(); ++si) tasks.push_back({ki, si});
    }
    std::vector<CountDistribution> dists(tasks.size());
    std::vector<double> tvs(tasks.size(), 0.0);
    std::atomic<std::uint64_t> peak{0};
    const int inner = inner_threads(spec.threads, tasks.size());
    parallel_tasks(spec.threads, tasks.size(), [&](std::size_t t) {
        const PerK& entry = per_k[tasks[t].k_index];
        const std::uint64_t seed = spec.seeds[tasks[t].seed_index];
        QuenchedRun run =
            conditional
                ? quenched_fixed_weight_run(spec.p, entry.k, entry.res.regime.target_weight,
                                            entry.res.regime.n_windows, seed, n_head,
                                            spec.memory_budget_bytes, inner)
                : quenched_all_words_run(spec.p, entry.k, entry.res.regime.n_windows, seed, n_head,
                                         spec.memory_budget_bytes, inner);
        if (conditional) tvs[t] = tv_distance(run.dist, entry.po);
        dists[t] = std::move(run.dist);
        std::uint64_t seen = peak.load();
        while (run.table_bytes > seen && !peak.compare_exchange_weak(seen, run.table_bytes)) {
        }
    });
    report.peak_memory_bytes = peak.load();

    std::size_t t = 0;
    for (const PerK& entry : per_k) {
        if (!entry.res.ok) {
            report.notes.push_back(k_note(entry.k, entry.res.note));
            report.guard_tripped = true;
            continue;
        }
        const std::size_t base = t;
        t += spec.seeds.size();
        std::vector<Value> row;
        row.push_back(Value::integer(entry.k));
        row.push_back(Value::integer(static_cast<std::int64_t>(spec.seeds.size())));
        row.push_back(Value::integer(static_cast<std::int64_t>(entry.res.regime.n_windows)));
        double max_sd = 0.0;
        for (int n = 0; n <= spec.n_max + 1; ++n) {
            std::vector<double> xs;
            for (std::size_t si = 0; si < spec.seeds.size(); ++si) {
                const CountDistribution& d = dists[base + si];
                xs.push_back(n <= spec.n_max ? d.pmf[n] : d.tail);
            }
            const double sd = sample_stddev(xs);
            max_sd = std::max(max_sd, sd);
            row.push_back(Value::real(sd));
        }
        if (conditional) {
            std::vector<double> xs(tvs.begin() + static_cast<std::ptrdiff_t>(base),
                                   tvs.begin() + static_cast<std::ptrdiff_t>(base + spec.seeds.size()));
            const double sd = sample_stddev(xs);
            max_sd = std::max(max_sd, sd);
            row.push_back(Value::real(sd));
        } else {
            row.push_back(Value::str(""));
        }
        row.push_back(Value::real(max_sd));
        row.push_back(Value::real(spec.dispersion_threshold));
        row.push_back(Value::str(max_sd <= spec.dispersion_threshold ? "PASS" : "FAIL"));
        report.rows.push_back(std::move(row));
    }
    finish(report, timer);
    return report;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
    switch (spec.kind) {
        case ExperimentKind::AnnealedExact: return run_annealed_exact(spec);
        case ExperimentKind::AnnealedMC: return run_annealed_mc(spec);
        case ExperimentKind::QuenchedRegime: return run_quenched_regime(spec);
        case ExperimentKind::ConditionalPoisson: return run_conditional_poisson(spec);
        case ExperimentKind::NonPoissonWitness: return run_non_poisson_witness(spec);
        case ExperimentKind::TvBound: return run_tv_bound(spec);
        case ExperimentKind::ConcentrationSweep: return run_concentration_sweep(spec);
    }
    internal_fail("unhandled experiment kind");
}

}  // namespace bitwords
