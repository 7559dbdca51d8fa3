#include "cddsat/simulation.hpp"

#include "cddsat/error.hpp"
#include "cddsat/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace cddsat::sim {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

int phase_count(const Grid& grid, const ContractionSchedule& schedule) {
    if (grid.population() < 3) return 0;
    TriangleFrame frame = initial_frame(grid);
    int phases = 1;
    while (auto next = contract(frame, schedule, phases + 1)) {
        frame = *next;
        ++phases;
        if (phases > 100000) break;
    }
    return phases;
}

}  // namespace

VerdictScript VerdictScript::parse(std::string_view text) {
    VerdictScript script;
    int line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const std::size_t end = std::min(text.find('\n', start), text.size());
        std::string_view line = text.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::string where = "verdict script line " + std::to_string(line_no) + ": ";
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) throw ValidationError(where + "expected 'phase:label=color,...'");
        const std::string_view phase_text = trim(line.substr(0, colon));
        int phase = 0;
        auto [p, ec] = std::from_chars(phase_text.data(), phase_text.data() + phase_text.size(), phase);
        if (ec != std::errc{} || p != phase_text.data() + phase_text.size() || phase < 1) {
            throw ValidationError(where + "malformed phase number '" + std::string(phase_text) + "'");
        }
        if (script.phases.count(phase)) throw ValidationError(where + "phase " + std::to_string(phase) + " repeated");
        auto& entries = script.phases[phase];
        std::string_view rest = line.substr(colon + 1);
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            const std::string_view item = trim(rest.substr(0, comma));
            rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
            const auto eq = item.find('=');
            if (eq == std::string_view::npos) throw ValidationError(where + "expected label=color, got '" + std::string(item) + "'");
            try {
                entries.push_back({ContainerLabel::parse(trim(item.substr(0, eq))), parse_status(trim(item.substr(eq + 1)))});
            } catch (const LabelError& e) {
                throw ValidationError(where + e.what());
            }
        }
        if (entries.size() < 3) throw ValidationError(where + "a phase needs at least 3 verdicts (alpha, beta, gamma)");
    }
    return script;
}

int auto_cols(long population, const ContractionSchedule& schedule) {
    if (population < 1) throw ValidationError("population must be at least 1");
    if (schedule.kind == ScheduleKind::paper48) return 4;
    int best_cols = 1;
    int best_phases = -1;
    long best_skew = 0;
    for (long c = 1; c <= population && c <= 1'000'000; ++c) {
        if (population % c != 0) continue;
        const Grid g = Grid::build(population, static_cast<int>(c));
        const int phases = phase_count(g, schedule);
        const long skew = std::labs(c - population / c);
        if (phases > best_phases || (phases == best_phases && skew < best_skew)) {
            best_cols = static_cast<int>(c);
            best_phases = phases;
            best_skew = skew;
        }
    }
    return best_cols;
}

SimulationResult simulate(const SimulationConfig& config, knowledge::KnowledgeStore* store) {
    if (config.population < 3) throw ValidationError("SAT requires at least 3 stacks");
    if (!(config.scan_jitter >= 0.0 && config.scan_jitter < 1.0)) throw ValidationError("scan jitter must lie in [0, 1)");
    config.sdd.validate();
    const int cols = config.cols > 0 ? config.cols : auto_cols(config.population, config.engine.schedule);
    SatSession session(Grid::build(config.population, cols), config.engine);
    const Grid& grid = session.grid();

    std::optional<sdd::ScenarioModel> model;
    if (!config.script) model.emplace(sdd::parse_scenario(config.scenario), config.engine.seed, grid);

    // Suggestion and verdicts for a phase, from the script or the scenario.
    const auto phase_plan = [&](int phase, const TriangleFrame& frame) {
        PhaseInput in;
        if (config.script) {
            auto it = config.script->phases.find(phase);
            if (it == config.script->phases.end()) {
                throw ValidationError("verdict script has no line for phase " + std::to_string(phase));
            }
            const auto& entries = it->second;
            in.suggestion = Suggestion{phase, entries[0].label, entries[1].label, entries[2].label};
            in.allow_extra = true;
            for (const auto& e : entries) in.verdicts.push_back(Verdict::from_status(e.label, e.status));
        } else {
            in.suggestion = suggest(frame, config.engine.sampler, config.engine.seed, phase);
            for (const auto& l : in.suggestion.distinct()) in.verdicts.push_back(model->detect(l, config.sdd));
        }
        return in;
    };

    SimulationResult result;
    result.grid = grid;

    std::optional<knowledge::ConfigKey> key;
    if (store) {
        const PhaseInput first = phase_plan(1, session.current_frame());
        key = knowledge::canonical_key(config.scenario, first.verdicts, config.population, cols, config.bucket_width);
        result.knowledge_key = key->hash();
        if (auto cached = store->lookup(*key)) {
            if (config.verify_knowledge && !store->verify(*key)) {
                throw Error("knowledge store entry " + key->hash() + " does not reproduce its profile");
            }
            db::PhaseRecord rec;
            rec.phase_no = 1;
            rec.containers = grid.labels();
            rec.alpha = {first.suggestion.alpha};
            rec.beta = {first.suggestion.beta};
            rec.gamma = {first.suggestion.gamma};
            rec.outcome = db::PhaseOutcome{cached->reds, cached->oranges, cached->greens, 0.0, 0.0};
            result.document.records.push_back(std::move(rec));
            result.document.terminated = true;
            result.profile = *cached;
            result.timing = timing::make_report({}, config.engine.scan_mode, config.population,
                                                config.engine.mean_scan_seconds);
            result.replayed = true;
            return result;
        }
    }

    Rng scan_rng(mix_seed(config.engine.seed, 0x5ca9ULL));
    while (!session.terminal()) {
        const int phase = session.phase_step() + 1;
        PhaseInput in = phase_plan(phase, session.current_frame());
        for (int i = 0; i < kInspectionsPerPhase; ++i) {
            const double jitter = config.scan_jitter > 0.0 ? config.scan_jitter * scan_rng.uniform(-1.0, 1.0) : 0.0;
            in.scan_seconds.push_back(config.engine.mean_scan_seconds * (1.0 + jitter));
        }
        session.run_phase(in);
    }
    if (config.script) {
        const int last = config.script->phases.rbegin()->first;
        if (last > session.phase_step()) {
            throw ValidationError("verdict script has lines up to phase " + std::to_string(last) +
                                  " but the session ended after phase " + std::to_string(session.phase_step()));
        }
    }

    result.document = session.document();
    result.profile = session.profile();
    result.timing = session.timing();
    result.phases = session.records();
    result.inspections = session.inspections();
    if (store && key) {
        knowledge::Entry e;
        e.profile = result.profile;
        e.seeds = session.seeds();
        e.population = config.population;
        e.cols = cols;
        e.metric = config.engine.metric;
        store->store(*key, std::move(e));
    }
    return result;
}

Profile simulate_sdd_only(long population, int cols, sdd::Scenario scenario, std::uint64_t seed,
                          const sdd::SddParams& params) {
    const Grid grid = Grid::build(population, cols);
    const sdd::ScenarioModel model(scenario, seed, grid);
    std::vector<LabelScore> scores;
    for (const auto& l : grid.labels()) scores.push_back({l, model.detect(l, params).p, true});
    return profile_from_scores(std::move(scores), grid);
}

}  // namespace cddsat::sim
