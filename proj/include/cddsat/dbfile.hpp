#pragma once

#include "cddsat/grid.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cddsat::db {

// Status lists and timings written once a phase has been sorted.
struct PhaseOutcome {
    std::vector<ContainerLabel> red;
    std::vector<ContainerLabel> orange;
    std::vector<ContainerLabel> green;
    double total_sorting_time = 0.0;    // seconds
    double total_detection_time = 0.0;  // seconds

    friend bool operator==(const PhaseOutcome&, const PhaseOutcome&) = default;
};

// One "<n>/PhaseContainers:...;" record.
struct PhaseRecord {
    int phase_no = 1;
    std::vector<ContainerLabel> containers;
    std::vector<ContainerLabel> alpha;  // "Alfa" on the wire
    std::vector<ContainerLabel> beta;
    std::vector<ContainerLabel> gamma;
    // Absent while the phase is still being inspected.
    std::optional<PhaseOutcome> outcome;

    bool complete() const { return outcome.has_value(); }

    friend bool operator==(const PhaseRecord&, const PhaseRecord&) = default;
};

struct DbDocument {
    std::vector<PhaseRecord> records;
    bool terminated = false;  // "END" marker present

    friend bool operator==(const DbDocument&, const DbDocument&) = default;
};

struct ParseOptions {
    // When false, a document without "END" parses with terminated = false.
    bool require_end = true;
};

// Whitespace anywhere in the text is ignored. Throws ParseError with the byte
// offset of the first problem.
DbDocument parse(std::string_view text, const ParseOptions& options = {});

// Throws ValidationError describing the first broken invariant.
void validate(const DbDocument& doc);

// Canonical form: one record per line, ';' after every field, "END" on the last
// line. Throws ValidationError for unterminated or invalid documents.
std::string serialize(const DbDocument& doc);

// Records only, without "END"; used for the on-disk copy of a running session.
std::string serialize_records(const std::vector<PhaseRecord>& records);

// Two CSV sections shaped like the per-phase cardinality table and the
// per-phase list table. Labels within a cell are listed column by column.
std::string export_tables(const DbDocument& doc, const Grid& grid);

// Formats seconds with two fraction digits ("0.68", "193.69").
std::string format_seconds(double seconds);

}  // namespace cddsat::db
