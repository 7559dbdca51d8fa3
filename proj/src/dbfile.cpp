#include "cddsat/dbfile.hpp"

#include "cddsat/csv.hpp"
#include "cddsat/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>

namespace cddsat::db {

namespace {

// Whitespace is insignificant anywhere in the file (real files wrap in
// the middle of labels and numbers), so parsing runs over a compacted copy that
// remembers where each character came from.
class Cursor {
public:
    explicit Cursor(std::string_view text) : original_size_(text.size()) {
        compact_.reserve(text.size());
        origin_.reserve(text.size());
        for (std::size_t i = 0; i < text.size(); ++i) {
            if (std::isspace(static_cast<unsigned char>(text[i]))) continue;
            compact_.push_back(text[i]);
            origin_.push_back(i);
        }
    }

    bool at_end() const { return pos_ >= compact_.size(); }
    char peek() const { return at_end() ? '\0' : compact_[pos_]; }
    std::size_t offset() const { return at_end() ? original_size_ : origin_[pos_]; }
    std::size_t offset_at(std::size_t compact_pos) const {
        return compact_pos < origin_.size() ? origin_[compact_pos] : original_size_;
    }
    std::size_t pos() const { return pos_; }

    bool starts_with(std::string_view lit) const {
        return std::string_view(compact_).substr(pos_).substr(0, lit.size()) == lit;
    }

    bool consume(std::string_view lit) {
        if (!starts_with(lit)) return false;
        pos_ += lit.size();
        return true;
    }

    void expect(std::string_view lit) {
        if (consume(lit)) return;
        fail("'" + std::string(lit) + "'", at_end() ? "unexpected end of input" : "unexpected '" + snippet() + "'");
    }

    // Characters up to the next field separator.
    std::string_view take_token() {
        const std::size_t start = pos_;
        while (!at_end() && compact_[pos_] != ',' && compact_[pos_] != ';' && compact_[pos_] != ':') ++pos_;
        return std::string_view(compact_).substr(start, pos_ - start);
    }

    std::string_view take_digits() {
        const std::size_t start = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(compact_[pos_]))) ++pos_;
        return std::string_view(compact_).substr(start, pos_ - start);
    }

    [[noreturn]] void fail(const std::string& expected, const std::string& message) const {
        throw ParseError(offset(), expected, message);
    }

    std::string snippet() const {
        std::string s = compact_.substr(pos_, 16);
        for (char& c : s) {
            if (!std::isprint(static_cast<unsigned char>(c))) c = '?';
        }
        return s;
    }

private:
    std::string compact_;
    std::vector<std::size_t> origin_;
    std::size_t original_size_;
    std::size_t pos_ = 0;
};

std::vector<ContainerLabel> parse_labels(Cursor& in, bool allow_empty) {
    std::vector<ContainerLabel> out;
    if (allow_empty && (in.peek() == ';' || in.peek() == ':')) return out;
    while (true) {
        const std::size_t start = in.pos();
        const std::string_view token = in.take_token();
        if (token.empty()) {
            throw ParseError(in.offset_at(start), "container label",
                             in.at_end() ? "unexpected end of input" : "empty label");
        }
        try {
            out.push_back(ContainerLabel::parse(token));
        } catch (const LabelError&) {
            std::string shown(token.substr(0, 24));
            for (char& c : shown) {
                if (!std::isprint(static_cast<unsigned char>(c))) c = '?';
            }
            throw ParseError(in.offset_at(start), "container label", "malformed label '" + shown + "'");
        }
        if (!in.consume(",")) return out;
    }
}

double parse_decimal(Cursor& in) {
    const std::size_t start = in.pos();
    const std::string_view token = in.take_token();
    const auto bad = [&] { throw ParseError(in.offset_at(start), "decimal seconds", "malformed number"); };
    // digits ['.' digits]
    const std::size_t dot = token.find('.');
    const std::string_view whole = token.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : token.substr(dot + 1);
    const auto all_digits = [](std::string_view s) {
        return std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
    };
    if (whole.empty() || !all_digits(whole)) bad();
    if (dot != std::string_view::npos && (frac.empty() || !all_digits(frac))) bad();
    double value = 0.0;
    auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || end != token.data() + token.size() || !std::isfinite(value)) bad();
    return value;
}

std::optional<std::string> record_problem(const PhaseRecord& rec, bool last) {
    const std::string where = "record " + std::to_string(rec.phase_no) + ": ";
    if (rec.containers.empty()) return where + "PhaseContainers is empty";
    const std::set<ContainerLabel> members(rec.containers.begin(), rec.containers.end());
    const auto side_ok = [&](const std::vector<ContainerLabel>& side, const char* name) -> std::optional<std::string> {
        if (side.empty()) return where + name + " is empty";
        for (const auto& l : side) {
            if (!members.count(l)) return where + name + " label " + l.str() + " is not in PhaseContainers";
        }
        return std::nullopt;
    };
    if (auto p = side_ok(rec.alpha, "Alfa")) return p;
    if (auto p = side_ok(rec.beta, "Beta")) return p;
    if (auto p = side_ok(rec.gamma, "Gamma")) return p;
    if (!rec.outcome) {
        if (!last) return where + "only the final record may omit its status lists";
        return std::nullopt;
    }
    const auto& o = *rec.outcome;
    std::set<ContainerLabel> seen;
    for (const auto* list : {&o.red, &o.orange, &o.green}) {
        for (const auto& l : *list) {
            if (!seen.insert(l).second) return where + "label " + l.str() + " appears in more than one status list";
        }
    }
    for (double t : {o.total_sorting_time, o.total_detection_time}) {
        if (!(t >= 0.0) || !std::isfinite(t)) return where + "times must be finite and non-negative";
    }
    return std::nullopt;
}

PhaseRecord parse_record(Cursor& in, int expected_phase) {
    PhaseRecord rec;
    const std::string_view digits = in.take_digits();
    int phase = 0;
    auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), phase);
    if (digits.empty() || ec != std::errc{}) {
        in.fail("phase header '" + std::to_string(expected_phase) + "/' or 'END'",
                in.at_end() ? "unexpected end of input" : "unexpected '" + in.snippet() + "'");
    }
    if (phase != expected_phase) {
        throw ParseError(in.offset_at(in.pos() - digits.size()), "phase " + std::to_string(expected_phase),
                         "out-of-order phase number " + std::string(digits));
    }
    rec.phase_no = phase;
    in.expect("/");
    in.expect("PhaseContainers:");
    rec.containers = parse_labels(in, false);
    in.expect(";");
    in.expect("Alfa:");
    rec.alpha = parse_labels(in, false);
    in.expect(";");
    in.expect("Beta:");
    rec.beta = parse_labels(in, false);
    in.expect(";");
    in.expect("Gamma:");
    rec.gamma = parse_labels(in, false);
    in.expect(";");
    if (!in.consume("Red:")) return rec;

    PhaseOutcome o;
    o.red = parse_labels(in, true);
    in.expect(";");
    in.expect("Orange:");
    o.orange = parse_labels(in, true);
    in.expect(";");
    in.expect("Green:");
    o.green = parse_labels(in, true);
    if (!in.consume(";") && !in.consume(":")) in.fail("';'", "unexpected '" + in.snippet() + "'");
    in.expect("TotalSortingTime:");
    o.total_sorting_time = parse_decimal(in);
    in.expect(";");
    in.expect("TotalDetectionTime:");
    o.total_detection_time = parse_decimal(in);
    in.expect(";");
    rec.outcome = std::move(o);
    return rec;
}

void append_labels(std::string& out, const std::vector<ContainerLabel>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ',';
        out += labels[i].str();
    }
}

void append_record(std::string& out, const PhaseRecord& rec) {
    out += std::to_string(rec.phase_no);
    out += "/PhaseContainers:";
    append_labels(out, rec.containers);
    out += ";Alfa:";
    append_labels(out, rec.alpha);
    out += ";Beta:";
    append_labels(out, rec.beta);
    out += ";Gamma:";
    append_labels(out, rec.gamma);
    out += ';';
    if (rec.outcome) {
        const auto& o = *rec.outcome;
        out += "Red:";
        append_labels(out, o.red);
        out += ";Orange:";
        append_labels(out, o.orange);
        out += ";Green:";
        append_labels(out, o.green);
        out += ";TotalSortingTime:" + format_seconds(o.total_sorting_time);
        out += ";TotalDetectionTime:" + format_seconds(o.total_detection_time) + ";";
    }
    out += '\n';
}

}  // namespace

DbDocument parse(std::string_view text, const ParseOptions& options) {
    Cursor in(text);
    DbDocument doc;
    while (true) {
        if (in.at_end()) {
            if (options.require_end) in.fail("'END'", "unterminated document");
            break;
        }
        if (in.peek() == 'E') {
            in.expect("END");
            if (!in.at_end()) in.fail("end of input", "trailing data after END");
            doc.terminated = true;
            break;
        }
        const std::size_t start = in.offset();
        PhaseRecord rec = parse_record(in, static_cast<int>(doc.records.size()) + 1);
        if (!doc.records.empty() && !doc.records.back().complete()) {
            throw ParseError(start, "'END'", "record follows an incomplete record");
        }
        if (auto problem = record_problem(rec, true)) throw ParseError(start, "valid record", *problem);
        doc.records.push_back(std::move(rec));
    }
    if (doc.records.empty() && (doc.terminated || options.require_end)) {
        throw ParseError(0, "phase header '1/'", "document has no records");
    }
    return doc;
}

void validate(const DbDocument& doc) {
    if (doc.records.empty()) throw ValidationError("document has no records");
    for (std::size_t i = 0; i < doc.records.size(); ++i) {
        const auto& rec = doc.records[i];
        if (rec.phase_no != static_cast<int>(i) + 1) {
            throw ValidationError("record " + std::to_string(i + 1) + " carries phase number " +
                                  std::to_string(rec.phase_no));
        }
        if (auto problem = record_problem(rec, i + 1 == doc.records.size())) throw ValidationError(*problem);
    }
}

std::string serialize(const DbDocument& doc) {
    if (!doc.terminated) throw ValidationError("only terminated documents can be serialized");
    validate(doc);
    std::string out = serialize_records(doc.records);
    out += "END\n";
    return out;
}

std::string serialize_records(const std::vector<PhaseRecord>& records) {
    std::string out;
    for (const auto& rec : records) append_record(out, rec);
    return out;
}

std::string format_seconds(double seconds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", seconds);
    std::string s(buf);
    if (s == "-0.00") s = "0.00";
    return s;
}

namespace {

Rect bounding_rect(const std::vector<ContainerLabel>& labels) {
    Rect r{};
    bool first = true;
    for (const auto& l : labels) {
        const GridCoord c = label_to_coord(l);
        if (first) {
            r = Rect{c.col, c.col, c.row, c.row};
            first = false;
            continue;
        }
        r.col_lo = std::min(r.col_lo, c.col);
        r.col_hi = std::max(r.col_hi, c.col);
        r.row_lo = std::min(r.row_lo, c.row);
        r.row_hi = std::max(r.row_hi, c.row);
    }
    return r;
}

// Column by column, rows ascending: "A7, D1".
std::string join_by_column(std::vector<ContainerLabel> labels) {
    std::sort(labels.begin(), labels.end(), [](const ContainerLabel& a, const ContainerLabel& b) {
        return label_to_coord(a) < label_to_coord(b);
    });
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ", ";
        out += labels[i].str();
    }
    return out;
}

std::string join_in_order(const std::vector<ContainerLabel>& labels) {
    std::string out;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (i) out += ", ";
        out += labels[i].str();
    }
    return out;
}

std::vector<ContainerLabel> rect_row(const Rect& r, int row) {
    std::vector<ContainerLabel> out;
    for (int c = r.col_lo; c <= r.col_hi; ++c) out.push_back(coord_to_label({c, row}));
    return out;
}

std::vector<ContainerLabel> rect_column(const Rect& r, int col) {
    std::vector<ContainerLabel> out;
    for (int row = r.row_lo; row <= r.row_hi; ++row) out.push_back(coord_to_label({col, row}));
    return out;
}

}  // namespace

std::string export_tables(const DbDocument& doc, const Grid& grid) {
    const double n = static_cast<double>(grid.population());
    std::string out;

    out += csv::row({"Phase", "Total Container Population", "Sorting Population for Alpha",
                     "Sorting Population for Beta", "Sorting Population for Gamma", "Detected Alpha",
                     "Detected Beta", "Detected Gamma", "List of Red", "List of Orange", "List of Green",
                     "Sorted Population", "Inspections"}) +
           "\n";
    std::size_t previous = 0;
    std::size_t sorted_total = 0;
    int inspections_total = 0;
    for (const auto& rec : doc.records) {
        if (!rec.complete()) continue;
        const Rect r = bounding_rect(rec.containers);
        const auto& o = *rec.outcome;
        std::vector<ContainerLabel> detected = rec.alpha;
        detected.insert(detected.end(), rec.beta.begin(), rec.beta.end());
        detected.insert(detected.end(), rec.gamma.begin(), rec.gamma.end());
        const auto detected_in = [&](const std::vector<ContainerLabel>& list) {
            std::vector<ContainerLabel> hits;
            for (const auto& l : detected) {
                if (std::find(list.begin(), list.end(), l) != list.end()) hits.push_back(l);
            }
            return join_by_column(hits);
        };
        const std::size_t classified = o.red.size() + o.orange.size() + o.green.size();
        const std::size_t newly = classified >= previous ? classified - previous : 0;
        previous = classified;
        sorted_total += newly;
        inspections_total += 3;
        out += csv::row({"Phase " + std::to_string(rec.phase_no), std::to_string(rec.containers.size()),
                         std::to_string(r.width()), std::to_string(r.height()), std::to_string(r.height()),
                         join_in_order(rec.alpha), join_in_order(rec.beta), join_in_order(rec.gamma),
                         detected_in(o.red), detected_in(o.orange), detected_in(o.green), std::to_string(newly),
                         "3"}) +
               "\n";
    }
    out += csv::row({"Total", "", "", "", "", "", "", "", "", "", "", std::to_string(sorted_total),
                     std::to_string(inspections_total)}) +
           "\n\n";

    out += csv::row({"Phase", "Sorting Population for Alpha", "Sorting Population for Beta",
                     "Sorting Population for Gamma", "Est. List of Reds", "Est. List of Orange", "Est. List of Greens",
                     "Sorted Population by Ratio"}) +
           "\n";
    const PhaseOutcome* last = nullptr;
    for (const auto& rec : doc.records) {
        if (!rec.complete()) continue;
        const Rect r = bounding_rect(rec.containers);
        const auto& o = *rec.outcome;
        last = &o;
        const double ratio = static_cast<double>(o.red.size() + o.orange.size() + o.green.size()) / n;
        out += csv::row({"Phase " + std::to_string(rec.phase_no), join_by_column(rect_row(r, r.row_hi)),
                         join_by_column(rect_column(r, r.col_hi)), join_by_column(rect_column(r, r.col_lo)),
                         join_by_column(o.red), join_by_column(o.orange), join_by_column(o.green),
                         csv::number(ratio)}) +
               "\n";
    }
    if (last) {
        const double ratio = static_cast<double>(last->red.size() + last->orange.size() + last->green.size()) / n;
        out += csv::row({"Total", "", "", "", std::to_string(last->red.size()), std::to_string(last->orange.size()),
                         std::to_string(last->green.size()), csv::number(ratio)}) +
               "\n";
    } else {
        out += csv::row({"Total", "", "", "", "0", "0", "0", "0"}) + "\n";
    }
    return out;
}

}  // namespace cddsat::db
