#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bitwords/analytic.hpp"
#include "bitwords/config.hpp"
#include "bitwords/errors.hpp"
#include "bitwords/experiments.hpp"
#include "bitwords/report_io.hpp"

namespace {

using namespace bitwords;

// One named argument: flag value if given, else config value, else absent.
class ArgSet {
  public:
    CLI::Option* add(CLI::App* cmd, const std::string& flag, const std::string& key,
                     const std::string& help) {
        auto slot = std::make_shared<std::string>();
        CLI::Option* opt = cmd->add_option(flag, *slot, help);
        slots_.push_back({key, slot, opt});
        return opt;
    }

    std::vector<std::string> accepted_keys() const {
        std::vector<std::string> keys{"kind", "out-csv", "out-json"};
        for (const Slot& s : slots_) keys.push_back(s.key);
        return keys;
    }

    void load_config(const ConfigFile& cfg, const std::string& kind_name,
                     std::vector<std::string>& outs) {
        cfg.restrict_keys(accepted_keys());
        if (const auto* kind = cfg.find("kind"); kind && kind->value != kind_name)
            throw ValidationError("config kind `" + kind->value + "` does not match subcommand `" +
                                  kind_name + "`");
        if (const auto* path = cfg.find("out-csv")) outs.push_back(path->value);
        if (const auto* path = cfg.find("out-json")) outs.push_back(path->value);
        for (Slot& s : slots_) {
            if (s.opt->count() > 0) continue;
            if (const auto* entry = cfg.find(s.key)) {
                *s.value = entry->value;
                s.from_config = true;
            }
        }
    }

    std::optional<std::string> get(const std::string& key) const {
        for (const Slot& s : slots_) {
            if (s.key != key) continue;
            if (s.opt->count() > 0 || s.from_config) return *s.value;
            return std::nullopt;
        }
        internal_fail("argument key not declared: " + key);
    }

    std::string require(const std::string& key) const {
        const auto v = get(key);
        if (!v) throw ValidationError("missing required argument `" + key + "`");
        return *v;
    }

    double real_or(const std::string& key, double fallback) const {
        const auto v = get(key);
        return v ? parse_real(*v, key) : fallback;
    }

    std::int64_t int_or(const std::string& key, std::int64_t fallback) const {
        const auto v = get(key);
        return v ? parse_int(*v, key) : fallback;
    }

    std::uint64_t uint_or(const std::string& key, std::uint64_t fallback) const {
        const auto v = get(key);
        return v ? parse_uint(*v, key) : fallback;
    }

  private:
    struct Slot {
        std::string key;
        std::shared_ptr<std::string> value;
        CLI::Option* opt;
        bool from_config = false;
    };
    std::vector<Slot> slots_;
};

struct SubcommandState {
    std::shared_ptr<ArgSet> args = std::make_shared<ArgSet>();
    std::shared_ptr<std::string> config_path = std::make_shared<std::string>();
    std::shared_ptr<std::vector<std::string>> outs = std::make_shared<std::vector<std::string>>();
};

void add_common_tail(CLI::App* cmd, SubcommandState& st) {
    cmd->add_option("--config", *st.config_path,
                    "flat key = value configuration file; explicit flags win");
    cmd->add_option("--out", *st.outs,
                    "output path, repeatable; .csv and .json select the format");
    st.args->add(cmd, "--threads", "threads", "worker thread cap; never changes results");
    st.args->add(cmd, "--memory-budget-mb", "memory-budget-mb",
                 "count-table memory budget in MiB");
}

void merge_config(SubcommandState& st, const std::string& kind_name) {
    if (st.config_path->empty()) return;
    const ConfigFile cfg = ConfigFile::parse_file(*st.config_path);
    st.args->load_config(cfg, kind_name, *st.outs);
}

RegimeRule rule_from_args(const ArgSet& args, RegimeKind fallback) {
    RegimeKind kind = fallback;
    if (const auto name = args.get("rule")) {
        if (*name == "entropy-scaled") kind = RegimeKind::EntropyScaled;
        else if (*name == "entropy-exponent-shifted") kind = RegimeKind::EntropyExponentShifted;
        else if (*name == "conditional-poisson") kind = RegimeKind::ConditionalPoisson;
        else if (*name == "explicit") kind = RegimeKind::Explicit;
        else throw ValidationError("unknown rule `" + *name + "`");
    }
    switch (kind) {
        case RegimeKind::EntropyScaled:
            return RegimeRule::entropy_scaled(args.real_or("a", 1.0));
        case RegimeKind::EntropyExponentShifted:
            return RegimeRule::entropy_exponent_shifted(parse_real(args.require("delta"), "delta"));
        case RegimeKind::ConditionalPoisson:
            return RegimeRule::conditional_poisson(args.real_or("c", 0.0),
                                                   args.real_or("lambda", 1.0));
        case RegimeKind::Explicit:
            return RegimeRule::explicit_windows_rule(parse_uint(args.require("n-windows"),
                                                                "n-windows"));
    }
    internal_fail("unhandled rule kind");
}

void fill_common(ExperimentSpec& spec, const ArgSet& args, int default_n_max) {
    spec.p = args.real_or("p", 0.6);
    spec.k_list = parse_int_list(args.require("k"), "k");
    spec.n_max = static_cast<int>(args.int_or("n-max", default_n_max));
    spec.threads = static_cast<int>(args.int_or("threads", 1));
    spec.memory_budget_bytes = args.uint_or("memory-budget-mb", 2048) << 20;
}

std::vector<std::uint64_t> seeds_from(const ArgSet& args, const std::string& fallback) {
    const auto v = args.get("seeds");
    const std::string text = v ? *v : fallback;
    if (text.empty() || text == "none") return {};
    return parse_seeds(text);
}

int emit(const ExperimentReport& report, const std::vector<std::string>& outs) {
    for (const std::string& path : outs) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ValidationError("cannot open output file: " + path);
        if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
            write_report_csv(report, out);
        else if (path.size() >= 5 && path.substr(path.size() - 5) == ".json")
            write_report_json(report, out);
        else
            throw ValidationError("output path must end in .csv or .json: " + path);
    }
    std::cout << "spec: " << spec_echo(report.spec) << "\n";
    write_report_table(report, std::cout);
    std::cerr << "# wall_seconds=" << format_real_human(report.wall_seconds)
              << " peak_memory_bytes=" << report.peak_memory_bytes << "\n";
    return report.guard_tripped ? 2 : 0;
}

constexpr const char* kHelpP = "probability of a 1 bit (symbol p)";
constexpr const char* kHelpK = "word lengths, comma separated (symbol k)";
constexpr const char* kHelpA = "geometric window-scale base (symbol a)";
constexpr const char* kHelpDelta = "entropy exponent shift (symbol delta)";
constexpr const char* kHelpC = "weight centering offset in sqrt(k) units (symbol c)";
constexpr const char* kHelpLambda = "target mean occurrence count (symbol lambda)";
constexpr const char* kHelpNWindows = "explicit window count (symbol N_k)";
constexpr const char* kHelpSeeds = "integer N for seeds 1..N, or an explicit comma list";
constexpr const char* kHelpNMax = "highest count tabulated separately; the rest is tail mass";
constexpr const char* kHelpRule =
    "window-count rule: entropy-scaled | entropy-exponent-shifted | conditional-poisson | "
    "explicit (resolves N_k)";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"occurrence statistics of random k-bit words in Bernoulli(p) bit sequences"};
    app.require_subcommand(1);
    int rc = 0;

    // annealed-exact
    {
        auto st = std::make_shared<SubcommandState>();
        CLI::App* cmd = app.add_subcommand(
            "annealed-exact", "exact disjoint-block match-count pmf under an entropy window rule");
        st->args->add(cmd, "--p", "p", kHelpP);
        st->args->add(cmd, "--k", "k", kHelpK);
        st->args->add(cmd, "--rule", "rule", kHelpRule);
        st->args->add(cmd, "--a", "a", kHelpA);
        st->args->add(cmd, "--delta", "delta", kHelpDelta);
        st->args->add(cmd, "--n-max", "n-max", kHelpNMax);
        add_common_tail(cmd, *st);
        cmd->callback([st, &rc] {
            merge_config(*st, "annealed-exact");
            ExperimentSpec spec;
            spec.kind = ExperimentKind::AnnealedExact;
            spec.rule = rule_from_args(*st->args, RegimeKind::EntropyScaled);
            fill_common(spec, *st->args, 8);
            rc = emit(run_annealed_exact(spec), *st->outs);
        });
    }

    // annealed-mc
    {
        auto st = std::make_shared<SubcommandState>();
        CLI::App* cmd = app.add_subcommand(
            "annealed-mc", "simulated disjoint-block match counts against the exact pmf");
        st->args->add(cmd, "--p", "p", kHelpP);
        st->args->add(cmd, "--k", "k", kHelpK);
        st->args->add(cmd, "--rule", "rule", kHelpRule);
        st->args->add(cmd, "--a", "a", kHelpA);
        st->args->add(cmd, "--delta", "delta", kHelpDelta);
        st->args->add(cmd, "--n-windows", "n-windows", kHelpNWindows);
        st->args->add(cmd, "--seeds", "seeds", kHelpSeeds);
        st->args->add(cmd, "--trials", "trials", "simulated words per (k, seed)");
        st->args->add(cmd, "--n-max", "n-max", kHelpNMax);
        add_common_tail(cmd, *st);
        cmd->callback([st, &rc] {
            merge_config(*st, "annealed-mc");
            ExperimentSpec spec;
            spec.kind = ExperimentKind::AnnealedMC;
            spec.rule = rule_from_args(*st->args, RegimeKind::EntropyScaled);
            fill_common(spec, *st->args, 8);
            spec.seeds = seeds_from(*st->args, "10");
            spec.trials = st->args->uint_or("trials", 100000);
            rc = emit(run_annealed_mc(spec), *st->outs);
        });
    }

    // quenched
    {
        auto st = std::make_shared<SubcommandState>();
        CLI::App* cmd = app.add_subcommand(
            "quenched", "sliding-window count pmf of a Ber(p) word over sampled sequences");
        st->args->add(cmd, "--p", "p", kHelpP);
        st->args->add(cmd, "--k", "k", kHelpK);
        st->args->add(cmd, "--rule", "rule", kHelpRule);
        st->args->add(cmd, "--a", "a", kHelpA);
        st->args->add(cmd, "--delta", "delta", kHelpDelta);
        st->args->add(cmd, "--n-windows", "n-windows", kHelpNWindows);
        st->args->add(cmd, "--seeds", "seeds", kHelpSeeds);
        st->args->add(cmd, "--n-max", "n-max", kHelpNMax);
        add_common_tail(cmd, *st);
        cmd->callback([st, &rc] {
            merge_config(*st, "quenched");
            ExperimentSpec spec;
            spec.kind = ExperimentKind::QuenchedRegime;
            spec.rule = rule_from_args(*st->args, RegimeKind::EntropyScaled);
            fill_common(spec, *st->args, 8);
            spec.seeds = seeds_from(*st->args, "10");
            rc = emit(run_quenched_regime(spec), *st->outs);
        });
    }

    // conditional-poisson
    {
        auto st = std::make_shared<SubcommandState>();
        CLI::App* cmd = app.add_subcommand(
            "conditional-poisson",
            "fixed-weight window-count law, exact over the weight class, with TV to Poisson");
        st->args->add(cmd, "--p", "p", kHelpP);
        st->args->add(cmd, "--k", "k", kHelpK);
        st->args->add(cmd, "--c", "c", kHelpC);
        st->args->add(cmd, "--lambda", "lambda", kHelpLambda);
        st->args->add(cmd, "--seeds", "seeds", kHelpSeeds);
        st->args->add(cmd, "--n-max", "n-max", kHelpNMax);
        add_common_tail(cmd, *st);
        cmd->callback([st, &rc] {
            merge_config(*st, "conditional-poisson");
            ExperimentSpec spec;
            spec.kind = ExperimentKind::ConditionalPoisson;
            spec.rule = RegimeRule::conditional_poisson(st->args->real_or("c", 0.0),
                                                        st->args->real_or("lambda", 1.0));
            fill_common(spec, *st->args, 32);
            spec.seeds = seeds_from(*st->args, "10");
            rc = emit(run_conditional_poisson(spec), *st->outs);
        });
    }

    // non-poisson-witness
    {
        auto st = std::make_shared<SubcommandState>();
        CLI::App* cmd = app.add_subcommand(
            "non-poisson-witness",
            "two-coordinate Poisson consistency check: lambda_hat = -ln pmf0 vs pmf1");
        st->args->add(cmd, "--p", "p", kHelpP);
        st->args->add(cmd, "--k", "k", kHelpK);
        st->args->add(cmd, "--rule", "rule", kHelpRule);
        st->args->add(cmd, "--a", "a", kHelpA);
        st->args->add(cmd, "--delta", "delta", kHelpDelta);
        st->args->add(cmd, "--seeds", "seeds",
                      "empty/none for the exact block model; otherwise per-seed sliding windows");
        st->args->add(cmd, "--n-max", "n-max", kHelpNMax);
        add_common_tail(cmd, *st);
        cmd->callback([st, &rc] {
            merge_config(*st, "non-poisson-witness");
            ExperimentSpec spec;
            spec.kind = ExperimentKind::NonPoissonWitness;
            spec.rule = rule_from_args(*st->args, RegimeKind::EntropyScaled);
            fill_common(spec, *st->args, 8);
            spec.seeds = seeds_from(*st->args, "");
            rc = emit(run_non_poisson_witness(spec), *st->outs);
        });
    }

    // tv-bound
    {
        auto st = std::make_shared<SubcommandState>();
        CLI::App* cmd = app.add_subcommand(
            "tv-bound", "Poisson-distance certificate, optionally against a Monte Carlo estimate");
        st->args->add(cmd, "--p", "p", kHelpP);
        st->args->add(cmd, "--k", "k", kHelpK);
        st->args->add(cmd, "--c", "c", kHelpC);
        st->args->add(cmd, "--lambda", "lambda", kHelpLambda);
        st->args->add(cmd, "--mode", "mode", "brute-force | analytic (overlap term evaluation)");
        st->args->add(cmd, "--support", "support",
                      "fixed-weight | all-words (distribution of the scanned word)");
        st->args->add(cmd, "--seeds", "seeds",
                      "empty/none for the certificate only; first seed drives the Monte Carlo");
        st->args->add(cmd, "--sequences", "sequences", "sampled sequences for the estimate");
        st->args->add(cmd, "--n-max", "n-max", kHelpNMax);
        add_common_tail(cmd, *st);
        cmd->callback([st, &rc] {
            merge_config(*st, "tv-bound");
            ExperimentSpec spec;
            spec.kind = ExperimentKind::TvBound;
            spec.rule = RegimeRule::conditional_poisson(st->args->real_or("c", 0.0),
                                                        st->args->real_or("lambda", 1.0));
            fill_common(spec, *st->args, 32);
            spec.seeds = seeds_from(*st->args, "");
            spec.trials = st->args->uint_or("sequences", 25);
            if (const auto mode = st->args->get("mode")) {
                if (*mode == "brute-force") spec.bound_mode = BoundMode::BruteForce;
                else if (*mode == "analytic") spec.bound_mode = BoundMode::AnalyticBound;
                else throw ValidationError("unknown mode `" + *mode + "`");
            }
            if (const auto sup = st->args->get("support")) {
                if (*sup == "fixed-weight") spec.support = WordSupport::FixedWeight;
                else if (*sup == "all-words") spec.support = WordSupport::AllWords;
                else throw ValidationError("unknown support `" + *sup + "`");
            }
            rc = emit(run_tv_bound(spec), *st->outs);
        });
    }

    // concentration
    {
        auto st = std::make_shared<SubcommandState>();
        CLI::App* cmd = app.add_subcommand(
            "concentration", "cross-seed dispersion of the per-seed pipeline, PASS/FAIL verdict");
        st->args->add(cmd, "--p", "p", kHelpP);
        st->args->add(cmd, "--k", "k", kHelpK);
        st->args->add(cmd, "--rule", "rule", kHelpRule);
        st->args->add(cmd, "--a", "a", kHelpA);
        st->args->add(cmd, "--delta", "delta", kHelpDelta);
        st->args->add(cmd, "--c", "c", kHelpC);
        st->args->add(cmd, "--lambda", "lambda", kHelpLambda);
        st->args->add(cmd, "--n-windows", "n-windows", kHelpNWindows);
        st->args->add(cmd, "--seeds", "seeds", kHelpSeeds);
        st->args->add(cmd, "--threshold", "threshold", "cross-seed dispersion PASS threshold");
        st->args->add(cmd, "--n-max", "n-max", kHelpNMax);
        add_common_tail(cmd, *st);
        cmd->callback([st, &rc] {
            merge_config(*st, "concentration");
            ExperimentSpec spec;
            spec.kind = ExperimentKind::ConcentrationSweep;
            spec.rule = rule_from_args(*st->args, RegimeKind::ConditionalPoisson);
            fill_common(spec, *st->args, 8);
            spec.seeds = seeds_from(*st->args, "10");
            spec.dispersion_threshold = st->args->real_or("threshold", 0.02);
            rc = emit(run_concentration_sweep(spec), *st->outs);
        });
    }

    // analytic
    {
        auto st = std::make_shared<SubcommandState>();
        CLI::App* cmd =
            app.add_subcommand("analytic", "evaluate one closed-form scalar and print it");
        auto fn = std::make_shared<std::string>();
        cmd->add_option("--fn", *fn,
                        "entropy | gaussian-cdf | gaussian-cdf-scaled | word-log-prob | "
                        "log-odds-exponent | limit-atom | match-prob | weight-floor | "
                        "weight-count | weight-mass | poisson-pmf | resolve")
            ->required();
        st->args->add(cmd, "--p", "p", kHelpP);
        st->args->add(cmd, "--k", "k", "word length (symbol k)");
        st->args->add(cmd, "--a", "a", kHelpA);
        st->args->add(cmd, "--c", "c", kHelpC);
        st->args->add(cmd, "--lambda", "lambda", kHelpLambda);
        st->args->add(cmd, "--delta", "delta", kHelpDelta);
        st->args->add(cmd, "--s", "s", "Gaussian CDF argument (symbol s)");
        st->args->add(cmd, "--weight", "weight", "Hamming weight (symbol n_k)");
        st->args->add(cmd, "--n", "n", "occurrence count (symbol n)");
        st->args->add(cmd, "--rule", "rule", kHelpRule);
        st->args->add(cmd, "--n-windows", "n-windows", kHelpNWindows);
        cmd->callback([st, fn] {
            const ArgSet& a = *st->args;
            const auto real = [&](const std::string& key) {
                return parse_real(a.require(key), key);
            };
            const auto as_int = [&](const std::string& key) {
                return static_cast<int>(parse_int(a.require(key), key));
            };
            const auto print = [](double v) { std::cout << format_real_machine(v) << "\n"; };
            if (*fn == "entropy") print(binary_entropy(real("p")));
            else if (*fn == "gaussian-cdf") print(gaussian_cdf(real("s")));
            else if (*fn == "gaussian-cdf-scaled") print(gaussian_cdf_scaled(real("s"), real("p")));
            else if (*fn == "word-log-prob") print(word_log_prob(as_int("k"), as_int("weight"), real("p")));
            else if (*fn == "log-odds-exponent") print(log_odds_exponent(real("a"), real("p")));
            else if (*fn == "limit-atom") print(limit_atom(real("a"), real("p")));
            else if (*fn == "match-prob") print(match_prob(as_int("k"), real("p")));
            else if (*fn == "weight-floor")
                std::cout << weight_floor(as_int("k"), real("p"), real("c")) << "\n";
            else if (*fn == "weight-count")
                std::cout << fixed_weight_count(as_int("k"), as_int("weight")) << "\n";
            else if (*fn == "weight-mass") {
                const WeightClassMass m = fixed_weight_mass(as_int("k"), as_int("weight"), real("p"));
                std::cout << "exact=" << format_real_machine(m.exact)
                          << " local_clt=" << format_real_machine(m.local_clt)
                          << " ratio=" << format_real_machine(m.ratio()) << "\n";
            } else if (*fn == "poisson-pmf")
                print(poisson_pmf(real("lambda"), as_int("n")));
            else if (*fn == "resolve") {
                const ModelParams params(real("p"), as_int("k"));
                const RegimeRule rule = rule_from_args(a, RegimeKind::EntropyScaled);
                const ResolvedRegime res = resolve_regime(rule, params);
                std::cout << "n_windows=" << res.n_windows << "\n";
                std::cout << "log2_windows=" << format_real_machine(res.log2_windows) << "\n";
                if (rule.kind == RegimeKind::ConditionalPoisson) {
                    std::cout << "target_weight=" << res.target_weight << "\n";
                    std::cout << "lambda_k=" << format_real_machine(res.realized_lambda) << "\n";
                }
            } else
                throw ValidationError("unknown --fn `" + *fn + "`");
        });
    }

    try {
        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : 1;
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const GuardError& e) {
        std::cerr << "guard: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        std::cerr << "internal invariant violation: " << e.what() << "\n";
        return 3;
    }
    return rc;
}
