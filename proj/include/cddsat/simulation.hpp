#pragma once

#include "cddsat/dbfile.hpp"
#include "cddsat/knowledge.hpp"
#include "cddsat/sat_engine.hpp"
#include "cddsat/sdd.hpp"
#include "cddsat/timing.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cddsat::sim {

struct ScriptEntry {
    ContainerLabel label;
    Status status = Status::green;
};

// Verdict script: one line per phase, "phase:label=color,label=color,...".
// The first three entries of a line are the alpha, beta and gamma picks; any
// further entries are extra detections on the frame sides. Blank lines and
// '#' comments are ignored.
struct VerdictScript {
    std::map<int, std::vector<ScriptEntry>> phases;

    static VerdictScript parse(std::string_view text);
};

struct SimulationConfig {
    long population = 48;
    int cols = 0;  // 0 picks a shape with auto_cols
    EngineConfig engine;
    // Scenario tag; must name an sdd::Scenario unless a script supplies verdicts.
    std::string scenario = "rust_oxidation";
    sdd::SddParams sdd;
    // Scan durations vary uniformly within +/- jitter * mean.
    double scan_jitter = 0.0;
    std::optional<VerdictScript> script;
    long bucket_width = 0;
    // Re-estimate a cached profile on every knowledge hit and fail on mismatch.
    bool verify_knowledge = false;
};

struct SimulationResult {
    Grid grid = Grid::build(1, 1);
    db::DbDocument document;
    Profile profile;
    timing::TimingReport timing;
    std::vector<PhaseResult> phases;
    int inspections = 0;
    bool replayed = false;
    std::string knowledge_key;
};

// Column count whose grid runs the most phases under `schedule`, preferring
// the squarest such shape (fewer columns on ties).
int auto_cols(long population, const ContractionSchedule& schedule);

// Runs every phase with scripted or scenario-generated verdicts. With a store,
// a configuration seen before is answered from the store without inspections,
// and a new one is recorded once the run finishes.
SimulationResult simulate(const SimulationConfig& config, knowledge::KnowledgeStore* store = nullptr);

// Scores each container of a yard too small for triangulation directly.
Profile simulate_sdd_only(long population, int cols, sdd::Scenario scenario, std::uint64_t seed,
                          const sdd::SddParams& params);

}  // namespace cddsat::sim
