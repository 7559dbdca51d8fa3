#include "cddsat/sat_engine.hpp"

#include "cddsat/error.hpp"
#include "cddsat/rng.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <string>

namespace cddsat {

namespace {

std::vector<ContainerLabel> row_labels(const Rect& r, int row) {
    std::vector<ContainerLabel> out;
    for (int c = r.col_lo; c <= r.col_hi; ++c) out.push_back(coord_to_label({c, row}));
    return out;
}

std::vector<ContainerLabel> column_labels(const Rect& r, int col) {
    std::vector<ContainerLabel> out;
    for (int row = r.row_lo; row <= r.row_hi; ++row) out.push_back(coord_to_label({col, row}));
    return out;
}

// Rects of the 48-container worked example, phases 1..3.
constexpr std::array<Rect, 3> kWorked48 = {{
    {0, 3, 0, 11},  // A1..D12
    {1, 3, 1, 10},  // B2..D11
    {2, 3, 7, 9},   // C8..D10
}};

std::optional<Rect> next_rect(const Rect& r, ScheduleKind kind, int next_phase) {
    switch (kind) {
        case ScheduleKind::paper48:
            if (next_phase < 1 || next_phase > static_cast<int>(kWorked48.size())) return std::nullopt;
            return kWorked48[static_cast<std::size_t>(next_phase - 1)];
        case ScheduleKind::paper56: {
            Rect n{r.col_lo + 1, r.col_hi - 1, r.row_lo, r.row_hi - 1};
            if (n.col_lo > n.col_hi || n.row_lo > n.row_hi) return std::nullopt;
            return n;
        }
        case ScheduleKind::inset1: {
            Rect n = r;
            if (r.width() >= 3) {
                ++n.col_lo;
                --n.col_hi;
            }
            if (r.height() >= 3) {
                ++n.row_lo;
                --n.row_hi;
            }
            if (n == r) return std::nullopt;
            return n;
        }
    }
    return std::nullopt;
}

}  // namespace

TriangleFrame TriangleFrame::from_rect(const Rect& rect) {
    return TriangleFrame{rect, row_labels(rect, rect.row_hi), column_labels(rect, rect.col_hi),
                         column_labels(rect, rect.col_lo)};
}

ScheduleKind parse_schedule(std::string_view name) {
    if (name == "inset1") return ScheduleKind::inset1;
    if (name == "paper48") return ScheduleKind::paper48;
    if (name == "paper56") return ScheduleKind::paper56;
    throw ValidationError("unknown contraction schedule '" + std::string(name) + "'");
}

std::string_view to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::inset1: return "inset1";
        case ScheduleKind::paper48: return "paper48";
        case ScheduleKind::paper56: return "paper56";
    }
    return "inset1";
}

void ContractionSchedule::check_grid(const Grid& grid) const {
    if (max_phases < 0) throw ValidationError("max_phases must be >= 0");
    if (kind == ScheduleKind::paper48 && (grid.cols() != 4 || grid.rows() != 12)) {
        throw ValidationError("the paper48 schedule only applies to a 4-column, 12-row yard");
    }
}

TriangleFrame initial_frame(const Grid& grid) {
    if (grid.population() < 3) throw ValidationError("SAT requires at least 3 stacks");
    return TriangleFrame::from_rect(grid.bounds());
}

std::optional<TriangleFrame> contract(const TriangleFrame& frame, const ContractionSchedule& schedule, int next_phase) {
    if (schedule.max_phases > 0 && next_phase > schedule.max_phases) return std::nullopt;
    const auto rect = next_rect(frame.rect, schedule.kind, next_phase);
    if (!rect || rect->area() < 3) return std::nullopt;
    return TriangleFrame::from_rect(*rect);
}

SamplerKind parse_sampler(std::string_view name) {
    if (name == "uniform") return SamplerKind::uniform;
    if (name == "quasi") return SamplerKind::quasi;
    throw ValidationError("unknown sampler '" + std::string(name) + "'");
}

std::string_view to_string(SamplerKind kind) { return kind == SamplerKind::uniform ? "uniform" : "quasi"; }

double van_der_corput(std::uint64_t index) {
    double result = 0.0;
    double scale = 0.5;
    for (; index; index >>= 1, scale *= 0.5) {
        if (index & 1) result += scale;
    }
    return result;
}

std::vector<ContainerLabel> Suggestion::distinct() const {
    std::vector<ContainerLabel> out{alpha};
    if (beta != alpha) out.push_back(beta);
    if (gamma != alpha && gamma != beta) out.push_back(gamma);
    return out;
}

Suggestion suggest(const TriangleFrame& frame, SamplerKind sampler, std::uint64_t seed, int phase) {
    const std::array<const std::vector<ContainerLabel>*, 3> sides = {&frame.alpha_side, &frame.beta_side,
                                                                     &frame.gamma_side};
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return sides[a]->size() < sides[b]->size(); });

    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(phase)));
    std::array<ContainerLabel, 3> picks;
    std::set<ContainerLabel> taken;
    for (int k = 0; k < 3; ++k) {
        const auto& side = *sides[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])];
        std::vector<ContainerLabel> candidates;
        for (const auto& l : side) {
            if (!taken.count(l)) candidates.push_back(l);
        }
        if (candidates.empty()) candidates = side;
        const double u = sampler == SamplerKind::uniform
                             ? rng.uniform()
                             : van_der_corput(static_cast<std::uint64_t>(3 * (phase - 1) + k + 1));
        const auto idx = std::min(candidates.size() - 1, static_cast<std::size_t>(u * static_cast<double>(candidates.size())));
        picks[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = candidates[idx];
        taken.insert(candidates[idx]);
    }
    return Suggestion{phase, picks[0], picks[1], picks[2]};
}

db::PhaseRecord to_record(const PhaseResult& result, sdd::ScanMode mode) {
    db::PhaseRecord rec;
    rec.phase_no = result.phase;
    for (GridCoord c : result.frame.rect.cells()) rec.containers.push_back(coord_to_label(c));
    rec.alpha = result.alpha_detected;
    rec.beta = result.beta_detected;
    rec.gamma = result.gamma_detected;
    // Times as the file stores them, so a parsed file equals the record.
    const auto centis = [](double s) { return std::stod(db::format_seconds(s)); };
    rec.outcome = db::PhaseOutcome{result.profile.reds, result.profile.oranges, result.profile.greens,
                                   centis(result.timing.sorting_seconds), centis(result.timing.detection_seconds(mode))};
    return rec;
}

SatSession::SatSession(Grid grid, EngineConfig config) : grid_(std::move(grid)), config_(config) {
    config_.schedule.check_grid(grid_);
    if (!(config_.mean_scan_seconds > 0.0)) throw ValidationError("mean scan time must be positive");
    frames_.push_back(initial_frame(grid_));
}

Suggestion SatSession::current_suggestion() const {
    if (terminal_) throw ConflictError("session is terminal; no further suggestions");
    return suggest(current_frame(), config_.sampler, config_.seed, phase_step() + 1);
}

const PhaseResult& SatSession::run_phase(const PhaseInput& input) {
    if (terminal_) throw ConflictError("session is terminal; no further phases");
    const int phase = phase_step() + 1;
    if (input.suggestion.phase != phase) {
        throw ConflictError("phase " + std::to_string(input.suggestion.phase) + " is not the current phase (" +
                            std::to_string(phase) + ")");
    }
    const TriangleFrame& frame = current_frame();
    const Suggestion& s = input.suggestion;
    {
        std::vector<std::string> off_side;
        if (!frame.on_alpha(label_to_coord(s.alpha))) off_side.push_back("alpha " + s.alpha.str());
        if (!frame.on_beta(label_to_coord(s.beta))) off_side.push_back("beta " + s.beta.str());
        if (!frame.on_gamma(label_to_coord(s.gamma))) off_side.push_back("gamma " + s.gamma.str());
        if (!off_side.empty()) throw ValidationError("suggested labels are not on their frame sides", off_side);
    }

    const std::vector<ContainerLabel> suggested = s.distinct();
    std::set<ContainerLabel> seen;
    std::vector<std::string> duplicates;
    std::vector<std::string> unexpected;
    std::vector<ContainerLabel> extras;
    for (const auto& v : input.verdicts) {
        if (!seen.insert(v.label).second) {
            duplicates.push_back(v.label.str());
            continue;
        }
        if (std::find(suggested.begin(), suggested.end(), v.label) != suggested.end()) continue;
        const GridCoord c = label_to_coord(v.label);
        if (!input.allow_extra || !frame.on_any_side(c)) {
            unexpected.push_back(v.label.str());
        } else {
            extras.push_back(v.label);
        }
    }
    if (!duplicates.empty()) throw ValidationError("duplicate verdicts", duplicates);
    std::vector<std::string> missing;
    for (const auto& l : suggested) {
        if (!seen.count(l)) missing.push_back(l.str());
    }
    if (!missing.empty()) throw ValidationError("missing verdicts for suggested containers", missing);
    if (!unexpected.empty()) throw ValidationError("verdicts for containers that were not suggested", unexpected);

    std::vector<double> scans = input.scan_seconds;
    if (scans.empty()) scans.assign(kInspectionsPerPhase, config_.mean_scan_seconds);
    if (scans.size() != static_cast<std::size_t>(kInspectionsPerPhase)) {
        throw ValidationError("expected " + std::to_string(kInspectionsPerPhase) + " scan durations");
    }
    for (double d : scans) {
        if (!(d > 0.0)) throw ValidationError("scan durations must be positive");
    }
    if (!(input.sorting_seconds >= 0.0)) throw ValidationError("sorting time must be non-negative");

    PhaseResult result;
    result.phase = phase;
    result.frame = frame;
    result.suggestion = s;
    result.verdicts = input.verdicts;
    result.alpha_detected = {s.alpha};
    result.beta_detected = {s.beta};
    result.gamma_detected = {s.gamma};
    for (const auto& l : extras) {
        const GridCoord c = label_to_coord(l);
        if (frame.on_alpha(c)) result.alpha_detected.push_back(l);
        if (frame.on_beta(c)) result.beta_detected.push_back(l);
        if (frame.on_gamma(c)) result.gamma_detected.push_back(l);
    }
    result.timing = timing::PhaseTiming{input.sorting_seconds, scans};

    std::vector<Verdict> seeds = seeds_;
    for (const auto& v : input.verdicts) {
        auto it = std::find_if(seeds.begin(), seeds.end(), [&](const Verdict& x) { return x.label == v.label; });
        if (it != seeds.end()) {
            it->p = v.p;
        } else {
            seeds.push_back(v);
        }
    }

    const auto next = contract(frame, config_.schedule, phase + 1);
    EstimateOptions opts;
    opts.active = frame.rect;
    opts.terminal = !next.has_value();
    opts.metric = config_.metric;
    result.profile = estimate(seeds, grid_, opts);

    seeds_ = std::move(seeds);
    terminal_ = opts.terminal || result.profile.classified_ratio >= 1.0;
    if (!terminal_) frames_.push_back(*next);
    records_.push_back(std::move(result));
    return records_.back();
}

std::vector<Verdict> SatSession::seeds() const { return seeds_; }

Profile SatSession::profile() const { return records_.empty() ? Profile{} : records_.back().profile; }

timing::TimingReport SatSession::timing() const {
    std::vector<timing::PhaseTiming> phases;
    for (const auto& r : records_) phases.push_back(r.timing);
    return timing::make_report(std::move(phases), config_.scan_mode, grid_.population(), config_.mean_scan_seconds);
}

db::DbDocument SatSession::document() const {
    db::DbDocument doc;
    for (const auto& r : records_) doc.records.push_back(to_record(r, config_.scan_mode));
    doc.terminated = terminal_;
    return doc;
}

}  // namespace cddsat
