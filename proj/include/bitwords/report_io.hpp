#pragma once

#include <iosfwd>
#include <string>

#include "bitwords/experiments.hpp"

namespace bitwords {

// Reals with 17 significant digits: enough to round-trip a double exactly.
std::string format_real_machine(double v);

// Reals with 6 significant digits for human-facing tables.
std::string format_real_human(double v);

// `key=value` echo of every result-affecting spec field, one token per field.
// Thread count and memory budget are execution knobs that cannot change rows,
// so they stay out and outputs stay byte-stable across them.
std::string spec_echo(const ExperimentSpec& spec);

// Comment block (schema version, spec echo, notes), header row, data rows.
void write_report_csv(const ExperimentReport& report, std::ostream& out);

// Nested document: schema_version, kind, spec object, columns, rows keyed by
// column name, notes, guard_tripped.
void write_report_json(const ExperimentReport& report, std::ostream& out);

// Aligned human table at 6 significant digits, notes appended.
void write_report_table(const ExperimentReport& report, std::ostream& out);

}  // namespace bitwords
