#include "bitwords/report_io.hpp"

#include <cstdio>
#include <ostream>

#include <json.hpp>

#include "bitwords/errors.hpp"

namespace bitwords {

namespace {

std::string format_real(double v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

std::string cell_text(const Value& v, bool human) {
    switch (v.kind) {
        case Value::Kind::Int: return std::to_string(v.i);
        case Value::Kind::Real: return human ? format_real_human(v.r) : format_real_machine(v.r);
        case Value::Kind::Str: return v.s;
    }
    internal_fail("unhandled value kind");
}

std::string join_uints(const std::vector<std::uint64_t>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(xs[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out.push_back(',');
        out += std::to_string(xs[i]);
    }
    return out;
}

std::string rule_echo(const RegimeRule& rule) {
    std::string out = "rule=";
    out += regime_kind_name(rule.kind);
    switch (rule.kind) {
        case RegimeKind::EntropyScaled:
            out += " a=" + format_real_machine(rule.a);
            break;
        case RegimeKind::EntropyExponentShifted:
            out += " delta=" + format_real_machine(rule.delta);
            break;
        case RegimeKind::ConditionalPoisson:
            out += " c=" + format_real_machine(rule.c);
            out += " lambda=" + format_real_machine(rule.lambda);
            break;
        case RegimeKind::Explicit:
            out += " n_windows=" + std::to_string(rule.explicit_windows);
            break;
    }
    return out;
}

}  // namespace

std::string format_real_machine(double v) { return format_real(v, "%.17g"); }

std::string format_real_human(double v) { return format_real(v, "%.6g"); }

std::string spec_echo(const ExperimentSpec& spec) {
    std::string out;
    out += "kind=";
    out += experiment_kind_name(spec.kind);
    out += " p=" + format_real_machine(spec.p);
    out += " " + rule_echo(spec.rule);
    out += " k=" + join_ints(spec.k_list);
    out += " seeds=" + (spec.seeds.empty() ? std::string("none") : join_uints(spec.seeds));
    out += " trials=" + std::to_string(spec.trials);
    out += " n_max=" + std::to_string(spec.n_max);
    if (spec.kind == ExperimentKind::ConcentrationSweep)
        out += " dispersion_threshold=" + format_real_machine(spec.dispersion_threshold);
    if (spec.kind == ExperimentKind::TvBound) {
        out += std::string(" bound_mode=") +
               (spec.bound_mode == BoundMode::BruteForce ? "brute-force" : "analytic");
        out += std::string(" support=") +
               (spec.support == WordSupport::FixedWeight ? "fixed-weight" : "all-words");
    }
    return out;
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
    out << "# schema_version=1\n";
    out << "# " << spec_echo(report.spec) << "\n";
    out << "# guard_tripped=" << (report.guard_tripped ? 1 : 0) << "\n";
    for (const std::string& note : report.notes) out << "# note=" << note << "\n";
    for (std::size_t i = 0; i < report.columns.size(); ++i) {
        if (i) out << ',';
        out << report.columns[i];
    }
    out << '\n';
    for (const auto& row : report.rows) {
        internal_check(row.size() == report.columns.size(), "row width mismatch");
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << cell_text(row[i], false);
        }
        out << '\n';
    }
}

void write_report_json(const ExperimentReport& report, std::ostream& out) {
    using json = nlohmann::ordered_json;
    json doc;
    doc["schema_version"] = 1;
    doc["kind"] = experiment_kind_name(report.spec.kind);

    json spec;
    spec["p"] = report.spec.p;
    json rule;
    rule["kind"] = regime_kind_name(report.spec.rule.kind);
    switch (report.spec.rule.kind) {
        case RegimeKind::EntropyScaled: rule["a"] = report.spec.rule.a; break;
        case RegimeKind::EntropyExponentShifted: rule["delta"] = report.spec.rule.delta; break;
        case RegimeKind::ConditionalPoisson:
            rule["c"] = report.spec.rule.c;
            rule["lambda"] = report.spec.rule.lambda;
            break;
        case RegimeKind::Explicit:
            rule["n_windows"] = report.spec.rule.explicit_windows;
            break;
    }
    spec["rule"] = rule;
    spec["k"] = report.spec.k_list;
    spec["seeds"] = report.spec.seeds;
    spec["trials"] = report.spec.trials;
    spec["n_max"] = report.spec.n_max;
    if (report.spec.kind == ExperimentKind::ConcentrationSweep)
        spec["dispersion_threshold"] = report.spec.dispersion_threshold;
    if (report.spec.kind == ExperimentKind::TvBound) {
        spec["bound_mode"] =
            report.spec.bound_mode == BoundMode::BruteForce ? "brute-force" : "analytic";
        spec["support"] =
            report.spec.support == WordSupport::FixedWeight ? "fixed-weight" : "all-words";
    }
    doc["spec"] = spec;

    doc["columns"] = report.columns;
    json rows = json::array();
    for (const auto& row : report.rows) {
        internal_check(row.size() == report.columns.size(), "row width mismatch");
        json obj;
        for (std::size_t i = 0; i < row.size(); ++i) {
            const Value& v = row[i];
            switch (v.kind) {
                case Value::Kind::Int: obj[report.columns[i]] = v.i; break;
                case Value::Kind::Real: obj[report.columns[i]] = v.r; break;
                case Value::Kind::Str: obj[report.columns[i]] = v.s; break;
            }
        }
        rows.push_back(std::move(obj));
    }
    doc["rows"] = rows;
    doc["notes"] = report.notes;
    doc["guard_tripped"] = report.guard_tripped;
    out << doc.dump(2) << '\n';
}

void write_report_table(const ExperimentReport& report, std::ostream& out) {
    std::vector<std::size_t> width(report.columns.size());
    std::vector<std::vector<std::string>> cells;
    cells.reserve(report.rows.size());
    for (std::size_t i = 0; i < report.columns.size(); ++i) width[i] = report.columns[i].size();
    for (const auto& row : report.rows) {
        internal_check(row.size() == report.columns.size(), "row width mismatch");
        std::vector<std::string> line;
        line.reserve(row.size());
        for (std::size_t i = 0; i < row.size(); ++i) {
            line.push_back(cell_text(row[i], true));
            width[i] = std::max(width[i], line.back().size());
        }
        cells.push_back(std::move(line));
    }
    const auto pad = [&](const std::string& s, std::size_t w) {
        out << s;
        for (std::size_t i = s.size(); i < w; ++i) out << ' ';
    };
    for (std::size_t i = 0; i < report.columns.size(); ++i) {
        if (i) out << "  ";
        pad(report.columns[i], width[i]);
    }
    out << '\n';
    for (const auto& line : cells) {
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (i) out << "  ";
            pad(line[i], width[i]);
        }
        out << '\n';
    }
    for (const std::string& note : report.notes) out << "note: " << note << '\n';
}

}  // namespace bitwords
