#pragma once

#include "cddsat/dbfile.hpp"
#include "cddsat/estimator.hpp"
#include "cddsat/grid.hpp"
#include "cddsat/sdd.hpp"
#include "cddsat/timing.hpp"

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace cddsat {

// The active rectangle and its three inspection sides: alpha is the top row of
// the rect (highest row number), beta the right column, gamma the left column.
struct TriangleFrame {
    Rect rect;
    std::vector<ContainerLabel> alpha_side;
    std::vector<ContainerLabel> beta_side;
    std::vector<ContainerLabel> gamma_side;

    static TriangleFrame from_rect(const Rect& rect);

    bool on_alpha(GridCoord c) const { return rect.contains(c) && c.row == rect.row_hi; }
    bool on_beta(GridCoord c) const { return rect.contains(c) && c.col == rect.col_hi; }
    bool on_gamma(GridCoord c) const { return rect.contains(c) && c.col == rect.col_lo; }
    bool on_any_side(GridCoord c) const { return on_alpha(c) || on_beta(c) || on_gamma(c); }

    friend bool operator==(const TriangleFrame&, const TriangleFrame&) = default;
};

enum class ScheduleKind {
    inset1,   // shrink every side by one where the axis is at least 3 long
    paper48,  // fixed rects of the 48-container worked example (4x12 yard)
    paper56,  // left+1, right-1, top-1 each phase (56-container DB example)
};

ScheduleKind parse_schedule(std::string_view name);
std::string_view to_string(ScheduleKind kind);

struct ContractionSchedule {
    ScheduleKind kind = ScheduleKind::inset1;
    // Phase cap; 0 means contract until fewer than 3 cells remain.
    int max_phases = 3;

    // Throws ValidationError when the schedule cannot drive this grid
    // (paper48 only fits the 4x12 yard).
    void check_grid(const Grid& grid) const;
};

// Full-grid frame. Throws ValidationError below 3 containers.
TriangleFrame initial_frame(const Grid& grid);

// Frame for `next_phase`, or nullopt when the schedule is exhausted or fewer
// than 3 cells would remain.
std::optional<TriangleFrame> contract(const TriangleFrame& frame, const ContractionSchedule& schedule, int next_phase);

enum class SamplerKind { uniform, quasi };

SamplerKind parse_sampler(std::string_view name);
std::string_view to_string(SamplerKind kind);

// Base-2 radical inverse: 1 -> 1/2, 2 -> 1/4, 3 -> 3/4, 4 -> 1/8.
double van_der_corput(std::uint64_t index);

struct Suggestion {
    int phase = 1;
    ContainerLabel alpha;
    ContainerLabel beta;
    ContainerLabel gamma;

    // Suggested labels with repeats removed, in alpha, beta, gamma order.
    std::vector<ContainerLabel> distinct() const;

    friend bool operator==(const Suggestion&, const Suggestion&) = default;
};

// One label per side. Sides are drawn smallest first and avoid labels already
// taken when the side has alternatives. The quasi sampler draws the k-th pick of
// the session from van_der_corput(k).
Suggestion suggest(const TriangleFrame& frame, SamplerKind sampler, std::uint64_t seed, int phase);

struct EngineConfig {
    ContractionSchedule schedule;
    SamplerKind sampler = SamplerKind::uniform;
    std::uint64_t seed = 1;
    Metric metric = Metric::euclidean;
    sdd::ScanMode scan_mode = sdd::ScanMode::sequential;
    double mean_scan_seconds = 12.5554;
};

inline constexpr int kInspectionsPerPhase = 3;

struct PhaseInput {
    Suggestion suggestion;
    std::vector<Verdict> verdicts;
    // Accept verdicts for further containers on the frame sides (fixture scripts).
    bool allow_extra = false;
    // One duration per inspection; empty means the configured mean.
    std::vector<double> scan_seconds;
    double sorting_seconds = 0.0;
};

struct PhaseResult {
    int phase = 1;
    TriangleFrame frame;
    Suggestion suggestion;
    std::vector<Verdict> verdicts;
    // Detected labels per side: the side's pick, then extras lying on that side.
    std::vector<ContainerLabel> alpha_detected;
    std::vector<ContainerLabel> beta_detected;
    std::vector<ContainerLabel> gamma_detected;
    Profile profile;  // cumulative
    timing::PhaseTiming timing;
    int inspections = kInspectionsPerPhase;
};

db::PhaseRecord to_record(const PhaseResult& result, sdd::ScanMode mode);

// Phase state machine for one inspection session. Not thread-safe; callers
// serialize access per session.
class SatSession {
public:
    SatSession(Grid grid, EngineConfig config);

    const Grid& grid() const { return grid_; }
    const EngineConfig& config() const { return config_; }
    int phase_step() const { return static_cast<int>(records_.size()); }
    bool terminal() const { return terminal_; }
    const TriangleFrame& current_frame() const { return frames_.back(); }
    const std::vector<TriangleFrame>& frames() const { return frames_; }
    const std::vector<PhaseResult>& records() const { return records_; }

    // Suggestion for the next phase. Throws ConflictError once terminal.
    Suggestion current_suggestion() const;

    // Validates and applies one phase of verdicts, re-estimates the profile and
    // contracts the frame. Throws ValidationError for bad verdicts and
    // ConflictError for a stale phase or a terminal session.
    const PhaseResult& run_phase(const PhaseInput& input);

    // Latest verdict per measured container, in measurement order.
    std::vector<Verdict> seeds() const;
    // Empty profile before the first phase.
    Profile profile() const;
    int inspections() const { return phase_step() * kInspectionsPerPhase; }
    timing::TimingReport timing() const;
    db::DbDocument document() const;

private:
    Grid grid_;
    EngineConfig config_;
    std::vector<TriangleFrame> frames_;
    std::vector<PhaseResult> records_;
    std::vector<Verdict> seeds_;
    bool terminal_ = false;
};

}  // namespace cddsat
