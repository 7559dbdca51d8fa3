// cddsat: batch simulation, DB file tools, benchmark series and the session server.

#include "cddsat/config.hpp"
#include "cddsat/dbfile.hpp"
#include "cddsat/error.hpp"
#include "cddsat/rng.hpp"
#include "cddsat/service.hpp"
#include "cddsat/simulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace {

using json = nlohmann::json;
using namespace cddsat;

constexpr int kExitData = 1;
constexpr int kExitUsage = 2;

// Bad flag values; reported with exit code 2.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text)) throw Error("cannot write " + path);
}

std::string timestamped(const std::string& prefix, const std::string& ext) {
    const std::time_t now = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", std::localtime(&now));
    return prefix + "-" + buf + ext;
}

json labels_json(const std::vector<ContainerLabel>& labels) {
    json out = json::array();
    for (const auto& l : labels) out.push_back(l.str());
    return out;
}

json timing_json(const timing::TimingReport& r) {
    return json{{"mode", std::string(sdd::to_string(r.mode))},
                {"t_other", r.t_other},
                {"t_d", r.t_d},
                {"t_saved", r.t_saved},
                {"t_d_sequential", r.t_d_in(sdd::ScanMode::sequential)},
                {"t_d_concurrent", r.t_d_in(sdd::ScanMode::concurrent)}};
}

json profile_json(const Profile& p) {
    return json{{"classified_ratio", p.classified_ratio},
                {"red", labels_json(p.reds)},
                {"orange", labels_json(p.oranges)},
                {"green", labels_json(p.greens)}};
}

json document_json(const db::DbDocument& doc) {
    json records = json::array();
    for (const auto& r : doc.records) {
        json rec{{"phase", r.phase_no},
                 {"containers", labels_json(r.containers)},
                 {"alpha", labels_json(r.alpha)},
                 {"beta", labels_json(r.beta)},
                 {"gamma", labels_json(r.gamma)}};
        if (r.outcome) {
            rec["red"] = labels_json(r.outcome->red);
            rec["orange"] = labels_json(r.outcome->orange);
            rec["green"] = labels_json(r.outcome->green);
            rec["total_sorting_time"] = r.outcome->total_sorting_time;
            rec["total_detection_time"] = r.outcome->total_detection_time;
        }
        records.push_back(std::move(rec));
    }
    return json{{"terminated", doc.terminated}, {"records", records}};
}

// The first record of a DB file lists the whole yard.
Grid grid_of(const db::DbDocument& doc) {
    if (doc.records.empty()) throw ValidationError("DB file has no records");
    int max_col = 0;
    for (const auto& l : doc.records.front().containers) max_col = std::max(max_col, label_to_coord(l).col);
    return Grid::build(static_cast<long>(doc.records.front().containers.size()), max_col + 1);
}

struct EngineFlags {
    std::string schedule = "inset1";
    std::string sampler = "uniform";
    std::uint64_t seed = 1;
    std::string scan = "sequential";
    std::string metric = "euclidean";
    double mean_scan = 12.5554;
    int max_phases = 3;

    void add(CLI::App& app) {
        app.add_option("--schedule", schedule, "Contraction schedule: inset1, paper48, paper56")->capture_default_str();
        app.add_option("--sampler", sampler, "Suggestion sampler: uniform, quasi")->capture_default_str();
        app.add_option("--seed", seed, "RNG seed")->capture_default_str();
        app.add_option("--scan", scan, "Scan mode: sequential, concurrent")->capture_default_str();
        app.add_option("--metric", metric, "Distance metric: euclidean, chebyshev")->capture_default_str();
        app.add_option("--mean-scan", mean_scan, "Mean seconds per container scan")->capture_default_str();
        app.add_option("--max-phases", max_phases, "Phase cap (0 = until the frame is exhausted)")->capture_default_str();
    }

    EngineConfig build() const {
        EngineConfig e;
        try {
            e.schedule.kind = parse_schedule(schedule);
            e.sampler = parse_sampler(sampler);
            e.scan_mode = sdd::parse_scan_mode(scan);
            e.metric = parse_metric(metric);
        } catch (const Error& err) {
            throw UsageError(err.what());
        }
        if (!(mean_scan > 0.0)) throw UsageError("--mean-scan must be positive");
        if (max_phases < 0) throw UsageError("--max-phases must be >= 0");
        e.seed = seed;
        e.mean_scan_seconds = mean_scan;
        e.schedule.max_phases = max_phases;
        return e;
    }
};

struct SimulateFlags {
    long population = 48;
    int cols = 0;
    EngineFlags engine;
    std::string scenario = "rust_oxidation";
    std::string script;
    std::string out;
    std::string csv;
    std::string knowledge;
    double jitter = 0.0;
    bool sdd_only = false;
};

int run_simulate(const SimulateFlags& f) {
    if (f.population < 1) throw UsageError("--population must be at least 1");
    if (f.cols < 0) throw UsageError("--cols must be positive");
    if (!(f.jitter >= 0.0 && f.jitter < 1.0)) throw UsageError("--scan-jitter must lie in [0, 1)");
    if (f.population < 3 && !f.sdd_only) {
        throw UsageError("a stack population below 3 cannot be triangulated; pass --sdd-only to analyse it by surface "
                         "damage detection alone");
    }
    const EngineConfig engine = f.engine.build();

    if (f.sdd_only) {
        sdd::Scenario scenario;
        try {
            scenario = sdd::parse_scenario(f.scenario);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
        const int cols = f.cols > 0 ? f.cols : 1;
        const Profile p = sim::simulate_sdd_only(f.population, cols, scenario, engine.seed, sdd::SddParams{});
        json out{{"mode", "sdd_only"}, {"population", f.population}, {"cols", cols}, {"inspections", f.population}};
        out["profile"] = profile_json(p);
        std::cout << out.dump(2) << "\n";
        return 0;
    }

    if (f.cols > 0) {
        try {
            engine.schedule.check_grid(Grid::build(f.population, f.cols));
        } catch (const ValidationError& e) {
            throw UsageError(e.what());
        }
    }

    sim::SimulationConfig cfg;
    cfg.population = f.population;
    cfg.cols = f.cols;
    cfg.engine = engine;
    cfg.scenario = f.scenario;
    cfg.scan_jitter = f.jitter;
    if (!f.script.empty()) {
        cfg.script = sim::VerdictScript::parse(read_file(f.script));
    } else {
        try {
            sdd::parse_scenario(f.scenario);
        } catch (const Error& e) {
            throw UsageError(e.what());
        }
    }

    std::optional<knowledge::KnowledgeStore> store;
    if (!f.knowledge.empty()) store.emplace(f.knowledge);
    const sim::SimulationResult r = sim::simulate(cfg, store ? &*store : nullptr);
    if (store) store->save();

    const std::string db_path = f.out.empty() ? timestamped("cddsat", ".db") : f.out;
    const std::string text = db::serialize(r.document);
    db::parse(text);  // self round-trip
    write_file(db_path, text);
    if (!f.csv.empty()) write_file(f.csv, db::export_tables(r.document, r.grid));

    json out{{"db", db_path},
             {"population", r.grid.population()},
             {"cols", r.grid.cols()},
             {"rows", r.grid.rows()},
             {"schedule", std::string(to_string(engine.schedule.kind))},
             {"phases", r.document.records.size()},
             {"inspections", r.inspections},
             {"replayed", r.replayed}};
    if (!r.knowledge_key.empty()) out["knowledge_key"] = r.knowledge_key;
    out["profile"] = profile_json(r.profile);
    out["timing"] = timing_json(r.timing);
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_parse_db(const std::string& path, bool canonical, bool allow_unterminated) {
    const db::DbDocument doc = db::parse(read_file(path), db::ParseOptions{!allow_unterminated});
    db::validate(doc);
    if (canonical) {
        std::cout << (doc.terminated ? db::serialize(doc) : db::serialize_records(doc.records));
    } else {
        std::cout << document_json(doc).dump(2) << "\n";
    }
    return 0;
}

int run_tables(const std::string& path) {
    const db::DbDocument doc = db::parse(read_file(path));
    db::validate(doc);
    std::cout << db::export_tables(doc, grid_of(doc));
    return 0;
}

struct BenchFlags {
    std::vector<long> populations;
    int repeats = 1;
    EngineFlags engine;
    double jitter = 0.0;
    std::string scenario = "rust_oxidation";
    std::string csv;
    std::string json_path;
};

int run_bench(const BenchFlags& f) {
    if (f.populations.empty()) throw UsageError("--populations needs at least one value");
    if (f.repeats < 1) throw UsageError("--repeats must be at least 1");
    if (!(f.jitter >= 0.0 && f.jitter < 1.0)) throw UsageError("--scan-jitter must lie in [0, 1)");
    std::set<long> seen;
    for (long n : f.populations) {
        if (n < 3) throw UsageError("every population must be at least 3 (got " + std::to_string(n) + ")");
        if (!seen.insert(n).second) throw UsageError("population " + std::to_string(n) + " listed twice");
    }
    const EngineConfig engine = f.engine.build();
    try {
        sdd::parse_scenario(f.scenario);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }

    // Mean of the per-repeat rows for each population.
    std::vector<timing::ChartRow> rows;
    for (long n : f.populations) {
        timing::ChartRow sum{n, 0, 0, 0, 0};
        for (int rep = 0; rep < f.repeats; ++rep) {
            sim::SimulationConfig cfg;
            cfg.population = n;
            cfg.engine = engine;
            cfg.engine.seed = f.repeats == 1 ? engine.seed : mix_seed(engine.seed, static_cast<std::uint64_t>(rep));
            cfg.scenario = f.scenario;
            cfg.scan_jitter = f.jitter;
            const auto r = sim::simulate(cfg);
            const auto row = timing::chart_series({{n, r.timing}}).front();
            sum.t_other += row.t_other;
            sum.t_d_seq += row.t_d_seq;
            sum.t_d_conc += row.t_d_conc;
            sum.t_saved += row.t_saved;
        }
        const double k = f.repeats;
        rows.push_back({n, sum.t_other / k, sum.t_d_seq / k, sum.t_d_conc / k, sum.t_saved / k});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.n < b.n; });

    const std::string csv = timing::chart_csv(rows);
    if (!f.csv.empty()) write_file(f.csv, csv);
    if (!f.json_path.empty()) write_file(f.json_path, timing::chart_json(rows));
    if (f.csv.empty() && f.json_path.empty()) std::cout << csv;
    return 0;
}

service::HttpServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

struct ServeFlags {
    std::string config_file;
    std::string bind;
    int port = -1;
    std::string data_dir;
    bool no_recover = false;
};

int run_serve(const ServeFlags& f) {
    ServiceConfig cfg;
    try {
        if (!f.config_file.empty()) cfg.load_file(f.config_file);
        cfg.apply_env([](const char* name) { return std::getenv(name); });
    } catch (const ValidationError& e) {
        throw UsageError(e.what());
    }
    if (!f.bind.empty()) cfg.bind = f.bind;
    if (f.port >= 0) cfg.port = f.port;
    if (!f.data_dir.empty()) cfg.data_dir = f.data_dir;

    service::SessionManager manager(cfg);
    if (!f.no_recover) {
        const auto n = manager.recover();
        if (n) std::cerr << "recovered " << n << " finished session(s)\n";
    }
    service::HttpServer server(manager);
    const int port = server.bind(cfg.bind, cfg.port);
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cout << "listening on " << cfg.bind << ":" << port << std::endl;
    server.listen();
    g_server = nullptr;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Container damage detection with sequential triangulation"};
    app.require_subcommand(1);

    SimulateFlags sim_flags;
    auto* simulate = app.add_subcommand("simulate", "Run every phase and write a DB file");
    simulate->add_option("--population,-n", sim_flags.population, "Stack population")->capture_default_str();
    simulate->add_option("--cols", sim_flags.cols, "Grid columns (0 picks a shape)")->capture_default_str();
    sim_flags.engine.add(*simulate);
    simulate->add_option("--scenario", sim_flags.scenario, "rust_oxidation, puncture or pristine")->capture_default_str();
    simulate->add_option("--verdict-script", sim_flags.script, "Scripted verdicts instead of the scenario model");
    simulate->add_option("--out", sim_flags.out, "DB file path (default: timestamped name)");
    simulate->add_option("--csv", sim_flags.csv, "Also write the per-phase tables as CSV");
    simulate->add_option("--scan-jitter", sim_flags.jitter, "Relative scan time spread in [0, 1)")->capture_default_str();
    simulate->add_option("--knowledge", sim_flags.knowledge, "Knowledge store file");
    simulate->add_flag("--sdd-only", sim_flags.sdd_only, "Score every container directly");

    std::string db_path;
    bool canonical = false;
    bool allow_unterminated = false;
    auto* parse_db = app.add_subcommand("parse-db", "Parse and validate a DB file, print it as JSON");
    parse_db->add_option("path", db_path, "DB file")->required();
    parse_db->add_flag("--canonical", canonical, "Print the canonical DB text instead of JSON");
    parse_db->add_flag("--allow-unterminated", allow_unterminated, "Accept a file without END");

    std::string tables_path;
    auto* tables = app.add_subcommand("tables", "Print the per-phase tables of a DB file as CSV");
    tables->add_option("path", tables_path, "DB file")->required();

    BenchFlags bench_flags;
    auto* bench = app.add_subcommand("bench", "Timing series over several populations");
    bench->add_option("--populations", bench_flags.populations, "Populations, comma separated")
        ->required()
        ->delimiter(',');
    bench->add_option("--repeats", bench_flags.repeats, "Runs averaged per population")->capture_default_str();
    bench_flags.engine.add(*bench);
    bench->add_option("--scan-jitter", bench_flags.jitter, "Relative scan time spread in [0, 1)")->capture_default_str();
    bench->add_option("--scenario", bench_flags.scenario, "Scenario model")->capture_default_str();
    bench->add_option("--csv", bench_flags.csv, "Write the CSV series here instead of stdout");
    bench->add_option("--json", bench_flags.json_path, "Also write the series as JSON");

    ServeFlags serve_flags;
    auto* serve = app.add_subcommand("serve", "Run the inspection session HTTP service");
    serve->add_option("--config", serve_flags.config_file, "key = value config file");
    serve->add_option("--bind", serve_flags.bind, "Bind address");
    serve->add_option("--port", serve_flags.port, "Port (0 = ephemeral)");
    serve->add_option("--data-dir", serve_flags.data_dir, "Directory for DB files and the knowledge store");
    serve->add_flag("--no-recover", serve_flags.no_recover, "Skip loading finished sessions at startup");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*simulate) return run_simulate(sim_flags);
        if (*parse_db) return run_parse_db(db_path, canonical, allow_unterminated);
        if (*tables) return run_tables(tables_path);
        if (*bench) return run_bench(bench_flags);
        if (*serve) return run_serve(serve_flags);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n" << app.help();
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitUsage;
}
