#include "cddsat/service.hpp"

#include "cddsat/dbfile.hpp"
#include "cddsat/error.hpp"
#include "cddsat/simulation.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>

namespace cddsat::service {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

// Typed accessors that report the offending field as a validation error.
const json* opt(const json& body, const char* name) {
    if (!body.is_object()) throw ValidationError("request body must be a JSON object");
    auto it = body.find(name);
    return it == body.end() || it->is_null() ? nullptr : &*it;
}

std::string get_string(const json& body, const char* name, const std::string& fallback) {
    const json* v = opt(body, name);
    if (!v) return fallback;
    if (!v->is_string()) throw ValidationError(std::string("field '") + name + "' must be a string", {name});
    return v->get<std::string>();
}

long long get_int(const json& body, const char* name, long long fallback) {
    const json* v = opt(body, name);
    if (!v) return fallback;
    if (!v->is_number_integer()) throw ValidationError(std::string("field '") + name + "' must be an integer", {name});
    return v->get<long long>();
}

double get_number(const json& body, const char* name, double fallback) {
    const json* v = opt(body, name);
    if (!v) return fallback;
    if (!v->is_number()) throw ValidationError(std::string("field '") + name + "' must be a number", {name});
    return v->get<double>();
}

bool get_bool(const json& body, const char* name, bool fallback) {
    const json* v = opt(body, name);
    if (!v) return fallback;
    if (!v->is_boolean()) throw ValidationError(std::string("field '") + name + "' must be a boolean", {name});
    return v->get<bool>();
}

ContainerLabel get_label(const json& item, const char* name) {
    const json* v = opt(item, name);
    if (!v || !v->is_string()) throw ValidationError(std::string("field '") + name + "' must be a label string", {name});
    try {
        return ContainerLabel::parse(v->get<std::string>());
    } catch (const LabelError& e) {
        throw ValidationError(e.what(), {e.text()});
    }
}

json labels_json(const std::vector<ContainerLabel>& labels) {
    json out = json::array();
    for (const auto& l : labels) out.push_back(l.str());
    return out;
}

json suggestion_json(const Suggestion& s) {
    return json{{"phase", s.phase},
                {"alpha", s.alpha.str()},
                {"beta", s.beta.str()},
                {"gamma", s.gamma.str()},
                {"labels", labels_json(s.distinct())}};
}

json frame_json(const TriangleFrame& f) {
    return json{{"rect", {{"col_lo", f.rect.col_lo}, {"col_hi", f.rect.col_hi}, {"row_lo", f.rect.row_lo},
                          {"row_hi", f.rect.row_hi}}},
                {"alpha", labels_json(f.alpha_side)},
                {"beta", labels_json(f.beta_side)},
                {"gamma", labels_json(f.gamma_side)}};
}

json timing_json(const timing::TimingReport& r, bool final) {
    json phases = json::array();
    for (const auto& p : r.per_phase) {
        phases.push_back({{"sorting_seconds", p.sorting_seconds},
                          {"scan_seconds", p.scan_seconds},
                          {"detection_seconds", p.detection_seconds(r.mode)}});
    }
    return json{{"mode", std::string(sdd::to_string(r.mode))},
                {"t_other", r.t_other},
                {"t_d", r.t_d},
                {"t_saved", r.t_saved},
                {"t_d_sequential", r.t_d_in(sdd::ScanMode::sequential)},
                {"t_d_concurrent", r.t_d_in(sdd::ScanMode::concurrent)},
                {"final", final},
                {"per_phase", phases}};
}

sdd::ImageRaster inline_image(const json& v) {
    if (!v.is_object()) throw ValidationError("field 'image' must be an object", {"image"});
    const auto w = get_int(v, "width", -1);
    const auto h = get_int(v, "height", -1);
    const json* px = opt(v, "pixels");
    if (!px || !px->is_array()) throw ValidationError("field 'image.pixels' must be an array", {"image.pixels"});
    std::vector<std::uint8_t> pixels;
    for (const auto& p : *px) {
        if (!p.is_number_integer() || p.get<long long>() < 0 || p.get<long long>() > 255) {
            throw ValidationError("image pixels must be integers in 0..255", {"image.pixels"});
        }
        pixels.push_back(static_cast<std::uint8_t>(p.get<int>()));
    }
    return sdd::ImageRaster(static_cast<int>(w), static_cast<int>(h), std::move(pixels));
}

sdd::SurfaceMap inline_surface(const json& v) {
    if (!v.is_object()) throw ValidationError("field 'surface' must be an object", {"surface"});
    const auto w = get_int(v, "width", -1);
    const auto h = get_int(v, "height", -1);
    const json* hs = opt(v, "heights");
    if (!hs || !hs->is_array()) throw ValidationError("field 'surface.heights' must be an array", {"surface.heights"});
    std::vector<double> heights;
    for (const auto& x : *hs) {
        if (!x.is_number()) throw ValidationError("surface heights must be numbers", {"surface.heights"});
        heights.push_back(x.get<double>());
    }
    return sdd::SurfaceMap(static_cast<int>(w), static_cast<int>(h), std::move(heights));
}

// Reference to a measurement file under the data directory.
fs::path data_ref(const fs::path& data_dir, const std::string& ref, const char* field) {
    const fs::path rel(ref);
    if (ref.empty() || rel.is_absolute()) throw ValidationError(std::string("field '") + field + "' must be a relative path", {field});
    for (const auto& part : rel) {
        if (part == "..") throw ValidationError(std::string("field '") + field + "' must not leave the data directory", {field});
    }
    const fs::path full = data_dir / rel;
    if (!fs::is_regular_file(full)) throw ValidationError(std::string("field '") + field + "': no such file " + ref, {ref});
    return full;
}

struct ParsedVerdict {
    Verdict verdict;
    std::optional<double> scan_seconds;
};

// {label, color} | {label, p} | {label, image_ref, surface_ref} | {label, image, surface}
ParsedVerdict parse_verdict(const json& item, const fs::path& data_dir, const sdd::SddParams& params) {
    if (!item.is_object()) throw ValidationError("each verdict must be an object");
    ParsedVerdict out{Verdict{get_label(item, "label"), PScore{}}, std::nullopt};
    const std::string label = out.verdict.label.str();
    if (const json* c = opt(item, "color")) {
        if (!c->is_string()) throw ValidationError("verdict color must be a string", {label});
        try {
            out.verdict.p = nominal_p(parse_status(c->get<std::string>()));
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), {label});
        }
    } else if (const json* p = opt(item, "p")) {
        if (!p->is_number()) throw ValidationError("verdict p must be a number", {label});
        try {
            out.verdict.p = PScore(p->get<double>());
        } catch (const ValidationError& e) {
            throw ValidationError(e.what(), {label});
        }
    } else if (opt(item, "image_ref") || opt(item, "surface_ref")) {
        const auto image = sdd::load_pgm(data_ref(data_dir, get_string(item, "image_ref", ""), "image_ref"));
        const auto surface = sdd::load_surface(data_ref(data_dir, get_string(item, "surface_ref", ""), "surface_ref"));
        out.verdict.p = sdd::sdd_score(image, surface, params);
    } else if (const json* img = opt(item, "image")) {
        const json* surf = opt(item, "surface");
        if (!surf) throw ValidationError("verdict with an image also needs a surface", {label});
        out.verdict.p = sdd::sdd_score(inline_image(*img), inline_surface(*surf), params);
    } else {
        throw ValidationError("verdict needs a color, a p score, or image and surface measurements", {label});
    }
    if (opt(item, "scan_seconds")) out.scan_seconds = get_number(item, "scan_seconds", 0.0);
    return out;
}

void write_atomically(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        out.flush();
        if (!out) throw Error("cannot write " + tmp.string());
    }
    fs::rename(tmp, path);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool valid_id(const std::string& id) {
    return !id.empty() && id.size() <= 64 &&
           std::all_of(id.begin(), id.end(), [](unsigned char c) { return std::isalnum(c) || c == '-' || c == '_'; });
}

}  // namespace

Disposition Disposition::from_json(const json& body) {
    const std::string kind = get_string(body, "disposition", "");
    Disposition d;
    d.note = get_string(body, "note", "");
    if (kind == "reject") {
        d.kind = DispositionKind::reject;
    } else if (kind == "isolate") {
        d.kind = DispositionKind::isolate;
    } else if (kind == "control") {
        d.kind = DispositionKind::control;
    } else if (kind == "accept") {
        d.kind = DispositionKind::accept;
    } else if (kind == "else") {
        d.kind = DispositionKind::else_note;
        const bool blank = std::all_of(d.note.begin(), d.note.end(), [](unsigned char c) { return std::isspace(c); });
        if (blank) throw ValidationError("disposition 'else' needs a non-empty note", {"note"});
    } else {
        throw ValidationError("disposition must be one of reject, isolate, control, accept, else", {"disposition"});
    }
    return d;
}

json Disposition::to_json() const {
    static const char* names[] = {"reject", "isolate", "control", "accept", "else"};
    json out{{"disposition", names[static_cast<int>(kind)]}};
    if (kind == DispositionKind::else_note || !note.empty()) out["note"] = note;
    return out;
}

struct SessionManager::Session {
    std::string id;
    std::mutex mutex;
    std::string scenario;
    sdd::SddParams sdd;
    EngineConfig engine;
    Grid grid = Grid::build(1, 1);
    fs::path db_path;
    Clock::time_point last_touch = Clock::now();
    timing::Stopwatch phase_clock;

    // Live SAT sessions; absent for SDD-only, replayed and recovered sessions.
    std::optional<SatSession> sat;
    bool sdd_only = false;
    bool replayed = false;
    bool read_only = false;
    std::optional<std::vector<Verdict>> first_verdicts;

    // State of sessions without an engine.
    std::vector<LabelScore> sdd_scores;
    std::vector<double> sdd_scans;
    std::optional<Profile> fixed_profile;
    std::optional<db::DbDocument> fixed_document;
    std::optional<timing::TimingReport> fixed_timing;

    std::optional<Disposition> decision;

    bool terminal() const {
        if (sat) return sat->terminal();
        // SDD-only sessions finish once every container has been scored.
        return !sdd_only || static_cast<long>(sdd_scores.size()) == grid.population();
    }

    Profile profile() const {
        if (sat) return sat->profile();
        if (fixed_profile) return *fixed_profile;
        if (sdd_only && !sdd_scores.empty()) return profile_from_scores(sdd_scores, grid);
        return Profile{};
    }

    timing::TimingReport timing() const {
        if (sat) return sat->timing();
        if (fixed_timing) return *fixed_timing;
        std::vector<timing::PhaseTiming> phases;
        if (!sdd_scans.empty()) phases.push_back({0.0, sdd_scans});
        return timing::make_report(std::move(phases), engine.scan_mode, grid.population(), engine.mean_scan_seconds);
    }

    db::DbDocument document() const {
        if (sat) return sat->document();
        if (fixed_document) return *fixed_document;
        throw ConflictError("SDD-only sessions have no DB file");
    }

    int inspections() const {
        if (sat) return sat->inspections();
        if (sdd_only) return static_cast<int>(sdd_scans.size());
        return 0;
    }

    int phase_step() const {
        if (sat) return sat->phase_step();
        return fixed_document ? static_cast<int>(fixed_document->records.size()) : 0;
    }
};

SessionManager::SessionManager(ServiceConfig config)
    : config_(std::move(config)), knowledge_(config_.data_dir / "knowledge.tsv") {
    config_.sdd.validate();
    fs::create_directories(config_.data_dir);
}

SessionManager::~SessionManager() = default;

std::string SessionManager::new_id() {
    static thread_local std::mt19937_64 rng{std::random_device{}()};
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(rng() ^ ++id_counter_));
    return buf;
}

std::shared_ptr<SessionManager::Session> SessionManager::find(const std::string& id) {
    if (config_.idle_timeout_seconds > 0.0) reap_idle();
    std::shared_lock lock(sessions_mutex_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError("no session '" + id + "'");
    return it->second;
}

std::size_t SessionManager::session_count() const {
    std::shared_lock lock(sessions_mutex_);
    return sessions_.size();
}

json SessionManager::create_session(const json& body) {
    if (config_.idle_timeout_seconds > 0.0) reap_idle();
    auto s = std::make_shared<Session>();
    s->scenario = get_string(body, "scenario", config_.scenario);
    s->sdd_only = get_bool(body, "sdd_only", false);
    s->engine = config_.engine;
    s->sdd = config_.sdd;
    try {
        if (opt(body, "schedule")) s->engine.schedule.kind = parse_schedule(get_string(body, "schedule", ""));
        if (opt(body, "sampler")) s->engine.sampler = parse_sampler(get_string(body, "sampler", ""));
        if (opt(body, "metric")) s->engine.metric = parse_metric(get_string(body, "metric", ""));
        if (opt(body, "scan_mode")) s->engine.scan_mode = sdd::parse_scan_mode(get_string(body, "scan_mode", ""));
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(e.what());
    }
    const long long seed = get_int(body, "seed", static_cast<long long>(s->engine.seed));
    if (seed < 0) throw ValidationError("field 'seed' must be non-negative", {"seed"});
    s->engine.seed = static_cast<std::uint64_t>(seed);
    s->engine.mean_scan_seconds = get_number(body, "mean_scan_seconds", s->engine.mean_scan_seconds);
    if (!(s->engine.mean_scan_seconds > 0.0)) throw ValidationError("field 'mean_scan_seconds' must be positive", {"mean_scan_seconds"});
    const long long max_phases = get_int(body, "max_phases", s->engine.schedule.max_phases);
    if (max_phases < 0) throw ValidationError("field 'max_phases' must be >= 0", {"max_phases"});
    s->engine.schedule.max_phases = static_cast<int>(max_phases);
    if (const json* p = opt(body, "sdd")) {
        s->sdd.threshold = static_cast<int>(get_int(*p, "threshold", s->sdd.threshold));
        s->sdd.weight_binarization = get_number(*p, "weight_binarization", s->sdd.weight_binarization);
        s->sdd.weight_roughness = get_number(*p, "weight_roughness", s->sdd.weight_roughness);
        s->sdd.weight_depth = get_number(*p, "weight_depth", s->sdd.weight_depth);
        s->sdd.roughness_cap_mm = get_number(*p, "roughness_cap_mm", s->sdd.roughness_cap_mm);
        s->sdd.depth_cap_mm = get_number(*p, "depth_cap_mm", s->sdd.depth_cap_mm);
    }
    s->sdd.validate();
    if (s->scenario.empty() || s->scenario.find_first_of("\t\n\r") != std::string::npos) {
        throw ValidationError("field 'scenario' must be a non-empty single-line tag", {"scenario"});
    }

    const json* pop = opt(body, "population");
    if (!pop || !pop->is_number_integer()) throw ValidationError("field 'population' must be an integer", {"population"});
    const long long population = pop->get<long long>();
    if (population < 1) throw ValidationError("population must be at least 1", {"population"});
    if (population < 3 && !s->sdd_only) {
        throw ValidationError(
            "a stack population below 3 cannot be triangulated; request sdd_only to analyse it by surface "
            "damage detection alone",
            {"population"});
    }
    const long long cols_in = get_int(body, "cols", 0);
    if (cols_in < 0) throw ValidationError("field 'cols' must be positive", {"cols"});
    const int cols = cols_in > 0 ? static_cast<int>(cols_in)
                     : s->sdd_only ? 1
                                   : sim::auto_cols(static_cast<long>(population), s->engine.schedule);
    s->grid = Grid::build(static_cast<long>(population), cols);

    std::optional<knowledge::ConfigKey> key;
    if (const json* known = opt(body, "known_verdicts")) {
        if (!known->is_array() || known->empty()) throw ValidationError("field 'known_verdicts' must be a non-empty array", {"known_verdicts"});
        std::vector<Verdict> verdicts;
        for (const auto& item : *known) verdicts.push_back(parse_verdict(item, config_.data_dir, s->sdd).verdict);
        for (const auto& v : verdicts) {
            if (!s->grid.contains(v.label)) throw ValidationError("known verdict outside the yard", {v.label.str()});
        }
        key = knowledge::canonical_key(s->scenario, verdicts, s->grid.population(), cols, config_.bucket_width);
    }

    s->id = new_id();
    s->db_path = config_.data_dir / (s->id + ".db");
    if (!s->sdd_only) {
        s->sat.emplace(s->grid, s->engine);
        if (key) {
            if (auto cached = knowledge_.lookup(*key)) {
                const Suggestion first = s->sat->current_suggestion();
                db::PhaseRecord rec;
                rec.phase_no = 1;
                rec.containers = s->grid.labels();
                rec.alpha = {first.alpha};
                rec.beta = {first.beta};
                rec.gamma = {first.gamma};
                rec.outcome = db::PhaseOutcome{cached->reds, cached->oranges, cached->greens, 0.0, 0.0};
                s->fixed_document = db::DbDocument{{std::move(rec)}, true};
                s->fixed_profile = *cached;
                s->fixed_timing = timing::make_report({}, s->engine.scan_mode, s->grid.population(),
                                                      s->engine.mean_scan_seconds);
                s->replayed = true;
                s->sat.reset();
                knowledge_.save();
                write_atomically(s->db_path, db::serialize(*s->fixed_document));
            }
        }
    }
    s->phase_clock.start();

    json summary;
    {
        std::lock_guard lock(s->mutex);
        summary = {{"id", s->id},
                   {"population", s->grid.population()},
                   {"cols", s->grid.cols()},
                   {"rows", s->grid.rows()},
                   {"scenario", s->scenario},
                   {"schedule", std::string(to_string(s->engine.schedule.kind))},
                   {"sampler", std::string(to_string(s->engine.sampler))},
                   {"seed", s->engine.seed},
                   {"metric", std::string(to_string(s->engine.metric))},
                   {"scan_mode", std::string(sdd::to_string(s->engine.scan_mode))},
                   {"sdd_only", s->sdd_only},
                   {"replayed", s->replayed},
                   {"phase_step", s->phase_step()},
                   {"terminal", s->terminal()},
                   {"knowledge_key", key ? json(key->hash()) : json(nullptr)}};
        if (s->sat) {
            summary["frame"] = frame_json(s->sat->current_frame());
            summary["suggestion"] = suggestion_json(s->sat->current_suggestion());
        } else {
            summary["suggestion"] = nullptr;
        }
    }
    std::unique_lock lock(sessions_mutex_);
    sessions_.emplace(s->id, s);
    return summary;
}

json SessionManager::get_suggestions(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    s->last_touch = Clock::now();
    if (s->sdd_only) throw ConflictError("SDD-only sessions have no suggestions");
    if (!s->sat) throw ConflictError("session is terminal; no further suggestions");
    json out = suggestion_json(s->sat->current_suggestion());
    out["frame"] = frame_json(s->sat->current_frame());
    return out;
}

json SessionManager::submit_verdicts(const std::string& id, const json& body) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    s->last_touch = Clock::now();
    if (s->read_only) throw ConflictError("session was recovered from disk and is read-only");
    const json* items = opt(body, "verdicts");
    if (!items || !items->is_array() || items->empty()) throw ValidationError("field 'verdicts' must be a non-empty array", {"verdicts"});

    std::vector<ParsedVerdict> parsed;
    for (const auto& item : *items) parsed.push_back(parse_verdict(item, config_.data_dir, s->sdd));

    if (s->sdd_only) {
        std::vector<std::string> outside;
        for (const auto& v : parsed) {
            if (!s->grid.contains(v.verdict.label)) outside.push_back(v.verdict.label.str());
        }
        if (!outside.empty()) throw ValidationError("containers outside the yard", outside);
        for (const auto& v : parsed) {
            auto it = std::find_if(s->sdd_scores.begin(), s->sdd_scores.end(),
                                   [&](const LabelScore& x) { return x.label == v.verdict.label; });
            if (it != s->sdd_scores.end()) {
                it->p = v.verdict.p;
            } else {
                s->sdd_scores.push_back({v.verdict.label, v.verdict.p, true});
            }
            s->sdd_scans.push_back(v.scan_seconds.value_or(s->engine.mean_scan_seconds));
        }
        const Profile p = s->profile();
        return json{{"phase", 0}, {"classified_ratio", p.classified_ratio}, {"terminal", s->terminal()},
                    {"red", labels_json(p.reds)}, {"orange", labels_json(p.oranges)}, {"green", labels_json(p.greens)},
                    {"inspections", s->inspections()}};
    }
    if (!s->sat) throw ConflictError("session is terminal; no further phases");

    const int current = s->sat->phase_step() + 1;
    const long long phase = get_int(body, "phase", current);
    if (phase != current) {
        throw ConflictError("phase " + std::to_string(phase) + " is not the current phase (" + std::to_string(current) + ")");
    }

    PhaseInput in;
    in.suggestion = s->sat->current_suggestion();
    if (const json* o = opt(body, "suggestion")) {
        in.suggestion.alpha = get_label(*o, "alpha");
        in.suggestion.beta = get_label(*o, "beta");
        in.suggestion.gamma = get_label(*o, "gamma");
    }
    in.allow_extra = get_bool(body, "allow_extra", false);
    for (const auto& v : parsed) in.verdicts.push_back(v.verdict);

    if (const json* scans = opt(body, "scan_seconds")) {
        if (!scans->is_array()) throw ValidationError("field 'scan_seconds' must be an array", {"scan_seconds"});
        for (const auto& x : *scans) {
            if (!x.is_number()) throw ValidationError("scan durations must be numbers", {"scan_seconds"});
            in.scan_seconds.push_back(x.get<double>());
        }
    } else if (std::any_of(parsed.begin(), parsed.end(), [](const ParsedVerdict& v) { return v.scan_seconds.has_value(); })) {
        // One inspection per side, timed by the verdict for that side's pick.
        for (const auto* pick : {&in.suggestion.alpha, &in.suggestion.beta, &in.suggestion.gamma}) {
            auto it = std::find_if(parsed.begin(), parsed.end(), [&](const ParsedVerdict& v) { return v.verdict.label == *pick; });
            in.scan_seconds.push_back(it != parsed.end() && it->scan_seconds ? *it->scan_seconds : s->engine.mean_scan_seconds);
        }
    }
    if (config_.wall_clock) {
        in.sorting_seconds = s->phase_clock.stop();
    } else {
        in.sorting_seconds = get_number(body, "sorting_seconds", 0.0);
    }

    const bool first_phase = s->sat->phase_step() == 0;
    const PhaseResult& result = s->sat->run_phase(in);
    if (first_phase) s->first_verdicts = in.verdicts;
    s->phase_clock.start();

    const db::DbDocument doc = s->sat->document();
    if (doc.terminated) {
        write_atomically(s->db_path, db::serialize(doc));
        if (s->first_verdicts) {
            const auto key = knowledge::canonical_key(s->scenario, *s->first_verdicts, s->grid.population(),
                                                      s->grid.cols(), config_.bucket_width);
            knowledge::Entry e;
            e.profile = s->sat->profile();
            e.seeds = s->sat->seeds();
            e.population = s->grid.population();
            e.cols = s->grid.cols();
            e.metric = s->engine.metric;
            knowledge_.store(key, std::move(e));
            knowledge_.save();
        }
    } else {
        write_atomically(s->db_path, db::serialize_records(doc.records));
    }

    json out{{"phase", result.phase},
             {"classified_ratio", result.profile.classified_ratio},
             {"terminal", s->sat->terminal()},
             {"red", labels_json(result.profile.reds)},
             {"orange", labels_json(result.profile.oranges)},
             {"green", labels_json(result.profile.greens)},
             {"alpha_detected", labels_json(result.alpha_detected)},
             {"beta_detected", labels_json(result.beta_detected)},
             {"gamma_detected", labels_json(result.gamma_detected)},
             {"inspections", s->sat->inspections()}};
    out["next_suggestion"] = s->sat->terminal() ? json(nullptr) : suggestion_json(s->sat->current_suggestion());
    return out;
}

json SessionManager::advance(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    s->last_touch = Clock::now();
    return json{{"id", s->id}, {"phase_step", s->phase_step()}, {"terminal", s->terminal()}};
}

json SessionManager::get_profile(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    s->last_touch = Clock::now();
    const Profile p = s->profile();
    json scores = json::object();
    for (const auto& ls : p.scores) scores[ls.label.str()] = {{"p", ls.p.value()}, {"status", std::string(to_string(band(ls.p)))}, {"seed", ls.seed}};
    return json{{"id", s->id},
                {"population", s->grid.population()},
                {"cols", s->grid.cols()},
                {"phase_step", s->phase_step()},
                {"terminal", s->terminal()},
                {"replayed", s->replayed},
                {"sdd_only", s->sdd_only},
                {"read_only", s->read_only},
                {"classified_ratio", p.classified_ratio},
                {"red", labels_json(p.reds)},
                {"orange", labels_json(p.oranges)},
                {"green", labels_json(p.greens)},
                {"scores", scores},
                {"inspections", s->inspections()},
                {"timing", timing_json(s->timing(), s->terminal())},
                {"decision", s->decision ? s->decision->to_json() : json(nullptr)}};
}

json SessionManager::post_decision(const std::string& id, const json& body) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    s->last_touch = Clock::now();
    if (s->read_only) throw ConflictError("session was recovered from disk and is read-only");
    if (!s->terminal()) throw ConflictError("a decision needs a finished session");
    s->decision = Disposition::from_json(body);
    json out = s->decision->to_json();
    out["id"] = s->id;
    return out;
}

std::string SessionManager::get_db(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    s->last_touch = Clock::now();
    const db::DbDocument doc = s->document();
    return doc.terminated ? db::serialize(doc) : db::serialize_records(doc.records);
}

std::string SessionManager::timing_csv(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mutex);
    s->last_touch = Clock::now();
    return timing::chart_csv(timing::chart_series({{s->grid.population(), s->timing()}}));
}

std::size_t SessionManager::recover() {
    std::size_t loaded = 0;
    if (!fs::is_directory(config_.data_dir)) return 0;
    for (const auto& entry : fs::directory_iterator(config_.data_dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".db") continue;
        const std::string id = entry.path().stem().string();
        if (!valid_id(id)) continue;
        {
            std::shared_lock lock(sessions_mutex_);
            if (sessions_.count(id)) continue;
        }
        db::DbDocument doc;
        try {
            doc = db::parse(read_file(entry.path()));
            db::validate(doc);
        } catch (const Error&) {
            continue;  // unfinished or damaged session
        }
        if (doc.records.empty() || !doc.records.back().complete()) continue;

        // The first record lists the whole yard.
        const auto& all = doc.records.front().containers;
        int max_col = 0;
        for (const auto& l : all) max_col = std::max(max_col, label_to_coord(l).col);
        auto s = std::make_shared<Session>();
        try {
            s->grid = Grid::build(static_cast<long>(all.size()), max_col + 1);
        } catch (const ValidationError&) {
            continue;
        }
        s->id = id;
        s->db_path = entry.path();
        s->engine = config_.engine;
        s->sdd = config_.sdd;
        s->scenario = config_.scenario;
        s->read_only = true;

        const auto& last = *doc.records.back().outcome;
        std::vector<LabelScore> scores;
        for (const auto& l : last.red) scores.push_back({l, nominal_p(Status::red), false});
        for (const auto& l : last.orange) scores.push_back({l, nominal_p(Status::orange), false});
        for (const auto& l : last.green) scores.push_back({l, nominal_p(Status::green), false});
        s->fixed_profile = profile_from_scores(std::move(scores), s->grid);
        std::vector<timing::PhaseTiming> phases;
        for (const auto& r : doc.records) {
            if (r.outcome->total_detection_time > 0.0) {
                phases.push_back({r.outcome->total_sorting_time, {r.outcome->total_detection_time}});
            }
        }
        s->fixed_timing = timing::make_report(std::move(phases), sdd::ScanMode::sequential, s->grid.population(),
                                              s->engine.mean_scan_seconds);
        s->fixed_document = std::move(doc);
        std::unique_lock lock(sessions_mutex_);
        if (sessions_.emplace(id, std::move(s)).second) ++loaded;
    }
    return loaded;
}

std::size_t SessionManager::reap_idle(Clock::time_point now) {
    if (!(config_.idle_timeout_seconds > 0.0)) return 0;
    const auto limit = std::chrono::duration<double>(config_.idle_timeout_seconds);
    std::unique_lock lock(sessions_mutex_);
    std::size_t removed = 0;
    for (auto it = sessions_.begin(); it != sessions_.end();) {
        auto& s = *it->second;
        std::unique_lock session_lock(s.mutex, std::try_to_lock);
        if (session_lock.owns_lock() && !s.terminal() && now - s.last_touch > limit) {
            session_lock.unlock();
            it = sessions_.erase(it);
            ++removed;
        } else {
            ++it;
        }
    }
    return removed;
}

}  // namespace cddsat::service
