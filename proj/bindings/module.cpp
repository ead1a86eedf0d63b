#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
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

namespace py = pybind11;
using namespace bitwords;

namespace {

RegimeRule rule_from_name(const std::string& kind, double a, double delta, double c,
                          double lambda, std::uint64_t n_windows) {
    if (kind == "entropy-scaled") return RegimeRule::entropy_scaled(a);
    if (kind == "entropy-exponent-shifted") return RegimeRule::entropy_exponent_shifted(delta);
    if (kind == "conditional-poisson") return RegimeRule::conditional_poisson(c, lambda);
    if (kind == "explicit") return RegimeRule::explicit_windows_rule(n_windows);
    throw ValidationError("unknown rule `" + kind + "`");
}

BlockCount blocks_from(std::optional<std::uint64_t> n_blocks, std::optional<double> log2_blocks) {
    if (n_blocks.has_value() == log2_blocks.has_value())
        throw ValidationError("pass exactly one of n_blocks and log2_blocks");
    return n_blocks ? BlockCount::from_exact(*n_blocks) : BlockCount::from_log2(*log2_blocks);
}

BoundMode bound_mode_from(const std::string& name) {
    if (name == "brute-force") return BoundMode::BruteForce;
    if (name == "analytic") return BoundMode::AnalyticBound;
    throw ValidationError("unknown mode `" + name + "`");
}

WordSupport support_from(const std::string& name) {
    if (name == "fixed-weight") return WordSupport::FixedWeight;
    if (name == "all-words") return WordSupport::AllWords;
    throw ValidationError("unknown support `" + name + "`");
}

py::object value_to_py(const Value& v) {
    switch (v.kind) {
        case Value::Kind::Int: return py::int_(v.i);
        case Value::Kind::Real: return py::float_(v.r);
        case Value::Kind::Str: return py::str(v.s);
    }
    throw std::logic_error("unhandled value kind");
}

py::dict report_to_py(const ExperimentReport& report) {
    py::dict out;
    out["kind"] = experiment_kind_name(report.spec.kind);
    py::list columns;
    for (const std::string& c : report.columns) columns.append(c);
    out["columns"] = columns;
    py::list rows;
    for (const auto& row : report.rows) {
        py::dict obj;
        for (std::size_t i = 0; i < row.size(); ++i)
            obj[py::str(report.columns[i])] = value_to_py(row[i]);
        rows.append(obj);
    }
    out["rows"] = rows;
    py::list notes;
    for (const std::string& n : report.notes) notes.append(n);
    out["notes"] = notes;
    out["guard_tripped"] = report.guard_tripped;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "occurrence statistics of random k-bit words in Bernoulli(p) bit sequences";

    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<GuardError>(m, "GuardError", PyExc_OverflowError);

    // closed-form scalars
    m.def("binary_entropy", &binary_entropy, py::arg("p"),
          "H(p) = -p log2 p - (1-p) log2 (1-p)");
    m.def("gaussian_cdf", &gaussian_cdf, py::arg("s"), "standard Gaussian CDF");
    m.def("gaussian_cdf_scaled", &gaussian_cdf_scaled, py::arg("s"), py::arg("p"),
          "Gaussian CDF with variance p(1-p)");
    m.def("word_log_prob",
          py::overload_cast<int, int, double>(&word_log_prob), py::arg("k"), py::arg("weight"),
          py::arg("p"), "log2 probability of a specific k-bit word of the given weight");
    m.def("log_odds_exponent", &log_odds_exponent, py::arg("a"), py::arg("p"),
          "exponent c solving a = (p/(1-p))^c");
    m.def("limit_atom", &limit_atom, py::arg("a"), py::arg("p"),
          "limiting zero-match mass for entropy-scaled budgets, p in (1/2, 1)");
    m.def("match_prob", &match_prob, py::arg("k"), py::arg("p"),
          "probability two independent Ber(p)^k words coincide");
    m.def("fixed_weight_count", &fixed_weight_count, py::arg("k"), py::arg("n"),
          "exact C(k, n) for k <= 64");
    m.def(
        "fixed_weight_mass",
        [](int k, int n, double p) {
            const WeightClassMass mass = fixed_weight_mass(k, n, p);
            return py::make_tuple(mass.exact, mass.local_clt);
        },
        py::arg("k"), py::arg("n"), py::arg("p"),
        "(exact, local_clt) mass of the weight-n class under Ber(p)^k");
    m.def("weight_floor", &weight_floor, py::arg("k"), py::arg("p"), py::arg("c"),
          "floor(p k - c sqrt(k))");
    m.def("poisson_pmf", &poisson_pmf, py::arg("lam"), py::arg("n"), "Poisson point mass");

    // window budget rules
    py::class_<ResolvedRegime>(m, "ResolvedRegime")
        .def_readonly("n_windows", &ResolvedRegime::n_windows)
        .def_readonly("log2_windows", &ResolvedRegime::log2_windows)
        .def_readonly("target_weight", &ResolvedRegime::target_weight)
        .def_readonly("realized_lambda", &ResolvedRegime::realized_lambda);
    m.def(
        "resolve_regime",
        [](double p, int k, const std::string& rule, double a, double delta, double c,
           double lambda, std::uint64_t n_windows) {
            return resolve_regime(rule_from_name(rule, a, delta, c, lambda, n_windows),
                                  ModelParams(p, k));
        },
        py::arg("p"), py::arg("k"), py::arg("rule"), py::arg("a") = 1.0, py::arg("delta") = 0.0,
        py::arg("c") = 0.0, py::arg("lam") = 1.0, py::arg("n_windows") = 0,
        "exact integer window budget for a rule; raises GuardError past 2^62");
    m.def(
        "resolve_regime_log2",
        [](double p, int k, const std::string& rule, double a, double delta, double c,
           double lambda, std::uint64_t n_windows) {
            return resolve_regime_log2(rule_from_name(rule, a, delta, c, lambda, n_windows), p, k);
        },
        py::arg("p"), py::arg("k"), py::arg("rule"), py::arg("a") = 1.0, py::arg("delta") = 0.0,
        py::arg("c") = 0.0, py::arg("lam") = 1.0, py::arg("n_windows") = 0,
        "log2 of the window budget without the integer cap");

    // exact disjoint-block match law
    py::class_<CountDistribution>(m, "CountDistribution")
        .def_readonly("pmf", &CountDistribution::pmf)
        .def_readonly("tail", &CountDistribution::tail);
    m.def(
        "annealed_pmf_at",
        [](int k, double p, int n, std::optional<std::uint64_t> n_blocks,
           std::optional<double> log2_blocks) {
            return annealed_pmf_at({k, p, blocks_from(n_blocks, log2_blocks), n}, n);
        },
        py::arg("k"), py::arg("p"), py::arg("n"), py::arg("n_blocks") = std::nullopt,
        py::arg("log2_blocks") = std::nullopt,
        "P(match count = n) for a random word against N independent blocks");
    m.def(
        "annealed_distribution",
        [](int k, double p, int n_max, std::optional<std::uint64_t> n_blocks,
           std::optional<double> log2_blocks) {
            return annealed_distribution({k, p, blocks_from(n_blocks, log2_blocks), n_max});
        },
        py::arg("k"), py::arg("p"), py::arg("n_max"), py::arg("n_blocks") = std::nullopt,
        py::arg("log2_blocks") = std::nullopt, "match-count pmf head plus tail mass");
    m.def(
        "annealed_mean",
        [](int k, double p, std::optional<std::uint64_t> n_blocks,
           std::optional<double> log2_blocks) {
            return annealed_mean({k, p, blocks_from(n_blocks, log2_blocks), 0});
        },
        py::arg("k"), py::arg("p"), py::arg("n_blocks") = std::nullopt,
        py::arg("log2_blocks") = std::nullopt, "N * match_prob(k, p)");
    m.def(
        "poisson_distribution",
        [](double lambda, int n_max) { return poisson_distribution(lambda, n_max); },
        py::arg("lam"), py::arg("n_max"));
    m.def("tv_distance", &tv_distance, py::arg("a"), py::arg("b"),
          "total variation over the union support, tails compared as one outcome");

    // counter-based randomness (numpy-Philox-compatible streams)
    m.def(
        "philox_block",
        [](std::uint64_t c0, std::uint64_t c1, std::uint64_t c2, std::uint64_t c3,
           std::uint64_t k0, std::uint64_t k1) {
            const auto b = philox_block(c0, c1, c2, c3, k0, k1);
            return py::make_tuple(b[0], b[1], b[2], b[3]);
        },
        py::arg("ctr0"), py::arg("ctr1") = 0, py::arg("ctr2") = 0, py::arg("ctr3") = 0,
        py::arg("key0") = 0, py::arg("key1") = 0, "raw 4x64 Philox block, 10 rounds");
    m.def(
        "stream_raw",
        [](std::uint64_t seed, std::uint64_t stream_id, std::uint64_t u) {
            return stream_raw(RngStream{seed, stream_id}, u);
        },
        py::arg("seed"), py::arg("stream_id"), py::arg("u"),
        "u-th 64-bit variate; bit-identical to numpy's Philox stream keyed (seed, stream_id)");
    m.def(
        "stream_uniform53",
        [](std::uint64_t seed, std::uint64_t stream_id, std::uint64_t u) {
            return stream_uniform53(RngStream{seed, stream_id}, u);
        },
        py::arg("seed"), py::arg("stream_id"), py::arg("u"), "u-th uniform on [0, 1), 53 bits");

    // sampling and window counting
    py::class_<Word>(m, "Word")
        .def_readonly("value", &Word::value)
        .def_readonly("width", &Word::width)
        .def_readonly("weight", &Word::weight);
    py::class_<BitSequence>(m, "BitSequence")
        .def("__len__", &BitSequence::size)
        .def("__getitem__",
             [](const BitSequence& s, std::uint64_t i) {
                 if (i >= s.size()) throw py::index_error();
                 return s.get(i);
             })
        .def("write_file", &BitSequence::write_file, py::arg("path"))
        .def_static("read_file", &BitSequence::read_file, py::arg("path"));
    m.def(
        "sample_sequence",
        [](std::uint64_t seed, std::uint64_t stream_id, std::uint64_t length, double p) {
            return sample_sequence(RngStream{seed, stream_id}, length, p);
        },
        py::arg("seed"), py::arg("stream_id"), py::arg("length"), py::arg("p"),
        "Ber(p) bit sequence; bit i is 1 iff the i-th stream uniform is < p");
    m.def(
        "sample_word",
        [](std::uint64_t seed, std::uint64_t stream_id, int k, double p) {
            return sample_word(RngStream{seed, stream_id}, k, p);
        },
        py::arg("seed"), py::arg("stream_id"), py::arg("k"), py::arg("p"));
    m.def(
        "sample_fixed_weight_word",
        [](std::uint64_t seed, std::uint64_t stream_id, int k, int weight) {
            return sample_fixed_weight_word(RngStream{seed, stream_id}, k, weight);
        },
        py::arg("seed"), py::arg("stream_id"), py::arg("k"), py::arg("weight"));

    py::class_<CountTable>(m, "CountTable")
        .def_static(
            "build",
            [](const BitSequence& seq, int k, std::uint64_t n_windows, int threads,
               std::optional<int> weight_filter, std::uint64_t memory_budget_bytes) {
                CountTable::BuildOptions options;
                options.threads = threads;
                options.weight_filter = weight_filter;
                options.memory_budget_bytes = memory_budget_bytes;
                return CountTable::build(seq, k, n_windows, options);
            },
            py::arg("seq"), py::arg("k"), py::arg("n_windows"), py::arg("threads") = 1,
            py::arg("weight_filter") = std::nullopt,
            py::arg("memory_budget_bytes") = std::uint64_t{2} << 30,
            "count every k-bit window of the first n_windows positions")
        .def_property_readonly("k", &CountTable::k)
        .def_property_readonly("n_windows", &CountTable::n_windows)
        .def_property_readonly("distinct_keys", &CountTable::distinct_keys)
        .def_property_readonly("saturated", &CountTable::saturated)
        .def("count_value", &CountTable::count_value, py::arg("value"))
        .def("items", [](const CountTable& t) {
            py::list out;
            t.for_each_ascending([&](std::uint64_t value, std::uint32_t count) {
                out.append(py::make_tuple(value, count));
            });
            return out;
        });
    m.def("quenched_distribution_fixed_weight", &quenched_distribution_fixed_weight,
          py::arg("table"), py::arg("weight"), py::arg("n_max"),
          "count law of a uniform word of the given weight, exact over the class");
    m.def("quenched_distribution_all_words", &quenched_distribution_all_words, py::arg("table"),
          py::arg("p"), py::arg("n_max"), "count law of a Ber(p)^k word");

    // Poisson-distance certificate
    py::class_<OverlapTerm>(m, "OverlapTerm")
        .def_readonly("ell", &OverlapTerm::ell)
        .def_readonly("joint", &OverlapTerm::joint)
        .def_readonly("n_pairs", &OverlapTerm::n_pairs);
    py::class_<TvBoundReport>(m, "TvBoundReport")
        .def_readonly("k", &TvBoundReport::k)
        .def_readonly("p", &TvBoundReport::p)
        .def_readonly("target_weight", &TvBoundReport::target_weight)
        .def_readonly("word_prob", &TvBoundReport::word_prob)
        .def_readonly("n_windows", &TvBoundReport::n_windows)
        .def_readonly("lambda_k", &TvBoundReport::lambda_k)
        .def_readonly("term_self", &TvBoundReport::term_self)
        .def_readonly("term_edges", &TvBoundReport::term_edges)
        .def_readonly("bound", &TvBoundReport::bound)
        .def_readonly("per_overlap", &TvBoundReport::per_overlap);
    m.def(
        "stein_chen_bound",
        [](int k, double p, double c, double lambda, const std::string& mode,
           const std::string& support) {
            return stein_chen_bound(k, p, c, lambda, bound_mode_from(mode),
                                    support_from(support));
        },
        py::arg("k"), py::arg("p"), py::arg("c") = 0.0, py::arg("lam") = 1.0,
        py::arg("mode") = "brute-force", py::arg("support") = "fixed-weight",
        "total-variation certificate for the window-count law against Po(lambda_k)");
    m.def("indicator_product_mean_bruteforce", &indicator_product_mean_bruteforce, py::arg("k"),
          py::arg("n_k"), py::arg("ell"), py::arg("p"),
          "E[I_i I_j] at overlap ell, word uniform on the weight class");
    m.def("indicator_product_mean_bruteforce_all", &indicator_product_mean_bruteforce_all,
          py::arg("k"), py::arg("ell"), py::arg("p"), "E[I_i I_j] with the word Ber(p)^k");

    // full experiment pipelines, rows as dicts
    m.def(
        "run_report",
        [](const std::string& kind, double p, const std::string& rule, double a, double delta,
           double c, double lambda, std::uint64_t n_windows, const std::vector<int>& k,
           const std::vector<std::uint64_t>& seeds, std::uint64_t trials, int n_max, int threads,
           std::uint64_t memory_budget_bytes, double dispersion_threshold,
           const std::string& mode, const std::string& support) {
            ExperimentSpec spec;
            spec.kind = experiment_kind_from_name(kind);
            spec.p = p;
            spec.rule = rule_from_name(rule, a, delta, c, lambda, n_windows);
            spec.k_list = k;
            spec.seeds = seeds;
            spec.trials = trials;
            spec.n_max = n_max;
            spec.threads = threads;
            spec.memory_budget_bytes = memory_budget_bytes;
            spec.dispersion_threshold = dispersion_threshold;
            spec.bound_mode = bound_mode_from(mode);
            spec.support = support_from(support);
            py::gil_scoped_release release;
            const ExperimentReport report = run_experiment(spec);
            py::gil_scoped_acquire acquire;
            return report_to_py(report);
        },
        py::arg("kind"), py::arg("p"), py::arg("rule"), py::arg("a") = 1.0,
        py::arg("delta") = 0.0, py::arg("c") = 0.0, py::arg("lam") = 1.0,
        py::arg("n_windows") = 0, py::arg("k") = std::vector<int>{},
        py::arg("seeds") = std::vector<std::uint64_t>{}, py::arg("trials") = 100000,
        py::arg("n_max") = 8, py::arg("threads") = 1,
        py::arg("memory_budget_bytes") = std::uint64_t{2} << 30,
        py::arg("dispersion_threshold") = 0.02, py::arg("mode") = "brute-force",
        py::arg("support") = "fixed-weight",
        "run one experiment pipeline; returns {kind, columns, rows, notes, guard_tripped}");
}
