// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "cddsat/dbfile.hpp"
#include "cddsat/error.hpp"
#include "cddsat/knowledge.hpp"
#include "cddsat/sat_engine.hpp"
#include "cddsat/simulation.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

using namespace cddsat;

namespace {

struct Check {
    std::vector<std::string> failures;
    std::vector<std::string> notes;

    void operator()(bool ok, const std::string& what) {
        if (!ok) failures.push_back(what);
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream ss;
        ss << what << ": got " << got << ", want " << want << " +/- " << tol;
        (*this)(std::fabs(got - want) <= tol, ss.str());
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fixture(const char* name) { return slurp(std::string(CDDSAT_FIXTURES) + "/" + name); }

std::vector<ContainerLabel> labels(std::initializer_list<const char*> xs) {
    std::vector<ContainerLabel> out;
    for (const char* x : xs) out.push_back(ContainerLabel::parse(x));
    return out;
}

std::string join(const std::vector<ContainerLabel>& xs) {
    std::string out;
    for (const auto& x : xs) out += (out.empty() ? "" : ", ") + x.str();
    return out;
}

sim::SimulationConfig worked48() {
    sim::SimulationConfig c;
    c.population = 48;
    c.cols = 4;
    c.engine.schedule.kind = ScheduleKind::paper48;
    c.script = sim::VerdictScript::parse(fixture("worked48.script"));
    return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void worked_structure(Check& check) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = sim::simulate(worked48());
    const double elapsed = seconds_since(t0);
    check(r.phases.size() == 3, "phase count " + std::to_string(r.phases.size()));
    const std::size_t expected[3][3] = {{4, 12, 12}, {3, 10, 10}, {2, 3, 3}};
    for (std::size_t i = 0; i < std::min<std::size_t>(3, r.phases.size()); ++i) {
        const auto& f = r.phases[i].frame;
        const std::string tag = "phase " + std::to_string(i + 1);
        check(f.alpha_side.size() == expected[i][0], tag + " alpha population " + std::to_string(f.alpha_side.size()));
        check(f.beta_side.size() == expected[i][1], tag + " beta population " + std::to_string(f.beta_side.size()));
        check(f.gamma_side.size() == expected[i][2], tag + " gamma population " + std::to_string(f.gamma_side.size()));
        check(r.phases[i].inspections == 3, tag + " inspections " + std::to_string(r.phases[i].inspections));
    }
    check(r.inspections == 9, "total inspections " + std::to_string(r.inspections));
    check(r.document.records.size() == 3 && r.document.terminated, "DB document has 3 records and END");
    check(elapsed < 1.0, "runtime " + std::to_string(elapsed) + " s");
}

void table5_sides(Check& check) {
    const auto r = sim::simulate(worked48());
    using L = std::vector<ContainerLabel>;
    const L alpha[3] = {labels({"A12", "B12", "C12", "D12"}), labels({"B11", "C11", "D11"}), labels({"C10", "D10"})};
    const L beta[3] = {
        labels({"D1", "D2", "D3", "D4", "D5", "D6", "D7", "D8", "D9", "D10", "D11", "D12"}),
        labels({"D2", "D3", "D4", "D5", "D6", "D7", "D8", "D9", "D10", "D11"}),
        labels({"D8", "D9", "D10"})};
    const L gamma[3] = {
        labels({"A1", "A2", "A3", "A4", "A5", "A6", "A7", "A8", "A9", "A10", "A11", "A12"}),
        labels({"B2", "B3", "B4", "B5", "B6", "B7", "B8", "B9", "B10", "B11"}),
        labels({"C8", "C9", "C10"})};
    check(r.phases.size() == 3, "phase count");
    for (std::size_t i = 0; i < std::min<std::size_t>(3, r.phases.size()); ++i) {
        const auto& f = r.phases[i].frame;
        const std::string tag = "phase " + std::to_string(i + 1);
        check(f.alpha_side == alpha[i], tag + " alpha: " + join(f.alpha_side));
        check(f.beta_side == beta[i], tag + " beta: " + join(f.beta_side));
        check(f.gamma_side == gamma[i], tag + " gamma: " + join(f.gamma_side));
    }
    // The DB file records each phase's picks on their sides.
    for (std::size_t i = 0; i < std::min(r.document.records.size(), r.phases.size()); ++i) {
        const auto& rec = r.document.records[i];
        const auto& f = r.phases[i].frame;
        bool on_sides = true;
        for (const auto& l : rec.alpha) on_sides = on_sides && f.on_alpha(label_to_coord(l));
        for (const auto& l : rec.beta) on_sides = on_sides && f.on_beta(label_to_coord(l));
        for (const auto& l : rec.gamma) on_sides = on_sides && f.on_gamma(label_to_coord(l));
        check(on_sides, "record " + std::to_string(i + 1) + " lists a pick off its side");
    }
}

void ratio_endpoints(Check& check) {
    const auto r = sim::simulate(worked48());
    if (r.phases.size() != 3) {
        check(false, "phase count");
        return;
    }
    const double r1 = r.phases[0].profile.classified_ratio;
    const double r2 = r.phases[1].profile.classified_ratio;
    const double r3 = r.phases[2].profile.classified_ratio;
    check(r1 == 0.0625, "phase 1 ratio " + std::to_string(r1));
    check(r2 > 0.0625 && r2 < 1.0, "phase 2 ratio " + std::to_string(r2));
    check(r3 == 1.0, "phase 3 ratio " + std::to_string(r3));
    check(r1 <= r2 && r2 <= r3, "ratios not monotone");
    std::ostringstream note;
    note << "phase 2 ratio " << r2 << " (reference value 0.5625)";
    check.notes.push_back(note.str());
}

void db_protocol(Check& check) {
    const std::string text = fixture("example56.db");
    const db::DbDocument doc = db::parse(text);
    check(doc.terminated, "not terminated");
    check(doc.records.size() == 2, "record count " + std::to_string(doc.records.size()));
    if (doc.records.size() == 2) {
        const auto& r1 = doc.records[0];
        check(r1.alpha == labels({"B7"}), "record 1 Alfa " + join(r1.alpha));
        check(r1.beta == labels({"H4"}), "record 1 Beta " + join(r1.beta));
        check(r1.gamma == labels({"A2"}), "record 1 Gamma " + join(r1.gamma));
        check(r1.complete(), "record 1 incomplete");
        if (r1.outcome) {
            check(r1.outcome->red.size() == 38, "reds " + std::to_string(r1.outcome->red.size()));
            check(r1.outcome->orange.size() == 18, "oranges " + std::to_string(r1.outcome->orange.size()));
            check(r1.outcome->green.empty(), "greens " + std::to_string(r1.outcome->green.size()));
            check(r1.outcome->total_sorting_time == 0.68, "TotalSortingTime");
            check(r1.outcome->total_detection_time == 193.69, "TotalDetectionTime");
        }
        check(!doc.records[1].complete(), "record 2 should be partial");
    }
    const std::string canonical = db::serialize(doc);
    check(db::parse(canonical) == doc, "parse of canonical text differs");
    check(db::serialize(db::parse(canonical)) == canonical, "canonical output not idempotent");

    // Fuzz: random mutations of the fixture and random token soup.
    std::mt19937_64 rng(2024);
    const std::string alphabet = "0123456789ABCDEFGHabc/:;,. \n\tENDPhaseContainersAlfaBetaGammaRedOrangeGreen";
    int crashes = 0;
    for (int i = 0; i < 10000; ++i) {
        std::string input;
        if (i % 2 == 0) {
            input = text;
            const int edits = 1 + static_cast<int>(rng() % 8);
            for (int e = 0; e < edits && !input.empty(); ++e) {
                const std::size_t at = rng() % input.size();
                switch (rng() % 3) {
                    case 0: input.erase(at, 1 + rng() % 10); break;
                    case 1: input.insert(at, 1, alphabet[rng() % alphabet.size()]); break;
                    default: input[at] = static_cast<char>(rng() % 256); break;
                }
            }
        } else {
            const std::size_t len = rng() % 200;
            for (std::size_t k = 0; k < len; ++k) input += alphabet[rng() % alphabet.size()];
        }
        try {
            const auto d = db::parse(input, db::ParseOptions{rng() % 2 == 0});
            const auto canon = [](const db::DbDocument& x) {
                return x.terminated ? db::serialize(x) : db::serialize_records(x.records);
            };
            const std::string once = canon(d);
            if (canon(db::parse(once, db::ParseOptions{false})) != once) ++crashes;
        } catch (const ParseError&) {
        } catch (const ValidationError&) {
        } catch (const std::exception&) {
            ++crashes;
        }
    }
    check(crashes == 0, std::to_string(crashes) + " fuzz inputs misbehaved");
}

void timing_model(Check& check) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = sim::simulate(worked48());
    const double elapsed = seconds_since(t0);
    check.near(timing::baseline_time(48, 12.5554), 602.66, 0.01, "baseline(48)");
    check.near(r.timing.t_other, 602.66, 0.01, "t_other");
    check.near(r.timing.t_d, 113.00, 0.01, "t_d");
    check.near(r.timing.t_saved, 489.66, 0.02, "t_saved");
    check(r.timing.mode == sdd::ScanMode::sequential, "mode");
    check(elapsed < 1.0, "runtime " + std::to_string(elapsed) + " s");
}

void concurrency(Check& check) {
    for (double d : {12.5, 4.0, 0.75}) {
        for (int groups = 1; groups <= 6; ++groups) {
            const std::vector<double> scans(3 * groups, d);
            const double seq = sdd::scan_time(scans, sdd::ScanMode::sequential);
            const double conc = sdd::scan_time(scans, sdd::ScanMode::concurrent);
            check(conc == seq / 3.0, "equal scans of " + std::to_string(d) + " in " + std::to_string(groups) + " groups");
        }
    }
    auto c = worked48();
    c.engine.scan_mode = sdd::ScanMode::concurrent;
    const auto r = sim::simulate(c);
    check.near(r.timing.t_d, 3 * 12.5554, 1e-9, "concurrent t_d of the worked example");
    check.near(r.timing.t_d_in(sdd::ScanMode::sequential) / r.timing.t_d, 3.0, 1e-12, "sequential / concurrent");

    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dur(0.1, 60.0);
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        std::vector<double> scans(1 + rng() % 30);
        for (auto& s : scans) s = dur(rng);
        if (sdd::scan_time(scans, sdd::ScanMode::concurrent) > sdd::scan_time(scans, sdd::ScanMode::sequential)) ++violations;
    }
    check(violations == 0, std::to_string(violations) + " cases with concurrent > sequential");
}

void banding(Check& check) {
    check(band(PScore(0.2)) == Status::orange, "0.2");
    check(band(PScore(0.5)) == Status::orange, "0.5");
    check(band(PScore(std::nextafter(0.2, 0.0))) == Status::green, "just below 0.2");
    check(band(PScore(std::nextafter(0.5, 1.0))) == Status::red, "just above 0.5");
    for (Status s : {Status::red, Status::orange, Status::green}) {
        check(band(nominal_p(s)) == s, "nominal round trip for " + std::string(to_string(s)));
    }
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int bad = 0;
    for (int i = 0; i < 100000; ++i) {
        const double p = i == 0 ? 0.0 : i == 1 ? 1.0 : u(rng);
        const Status s = band(PScore(p));
        const int hits = (p < 0.2) + (p >= 0.2 && p <= 0.5) + (p > 0.5);
        const Status want = p < 0.2 ? Status::green : p <= 0.5 ? Status::orange : Status::red;
        if (hits != 1 || s != want) ++bad;
    }
    check(bad == 0, std::to_string(bad) + " random p values misbanded");
}

double oracle_p(GridCoord cell, const std::vector<std::pair<GridCoord, double>>& seeds, long n) {
    const double reach = std::sqrt(static_cast<double>(n)) + 1.0;
    double best = 0.0;
    for (const auto& [c, p] : seeds) {
        if (c == cell) return p;
        const double dx = c.col - cell.col, dy = c.row - cell.row;
        const double d = std::sqrt(dx * dx + dy * dy);
        best = std::max(best, p * std::min(1.0, reach / std::max(d, 1.0)));
    }
    return best;
}

void estimator(Check& check) {
    const Grid g = Grid::build(144, 12);
    const EstimateOptions all{std::nullopt, true, Metric::euclidean};
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> prob(0.0, 1.0);

    // Single seed at every cell: oracle agreement and decay with distance.
    int mismatches = 0, rises = 0;
    for (long i = 0; i < 144; ++i) {
        const GridCoord sc = g.coord_at(i);
        const double p = prob(rng);
        const Profile prof = estimate({{coord_to_label(sc), PScore(p)}}, g, all);
        std::vector<std::pair<double, double>> by_distance;
        for (const auto& s : prof.scores) {
            const GridCoord c = label_to_coord(s.label);
            if (std::fabs(s.p.value() - oracle_p(c, {{sc, p}}, 144)) > 1e-12) ++mismatches;
            if (!(c == sc)) by_distance.push_back({distance(sc, c), s.p.value()});
        }
        std::sort(by_distance.begin(), by_distance.end());
        for (std::size_t k = 1; k < by_distance.size(); ++k) {
            if (by_distance[k].second > by_distance[k - 1].second + 1e-15) ++rises;
        }
    }
    check(mismatches == 0, std::to_string(mismatches) + " cells differ from the oracle");
    check(rises == 0, std::to_string(rises) + " increases of p with distance");

    // Adding a seed never lowers a score.
    int lowered = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<Verdict> seeds;
        std::set<long> used;
        const int k = 1 + trial % 6;
        while (static_cast<int>(seeds.size()) < k + 1) {
            const long i = static_cast<long>(rng() % 144);
            if (used.insert(i).second) seeds.push_back({coord_to_label(g.coord_at(i)), PScore(prob(rng))});
        }
        const Verdict extra = seeds.back();
        seeds.pop_back();
        const Profile before = estimate(seeds, g, all);
        seeds.push_back(extra);
        const Profile after = estimate(seeds, g, all);
        for (const auto& s : before.scores) {
            if (s.label == extra.label) continue;
            const auto q = after.p_of(s.label);
            if (!q || q->value() < s.p.value()) ++lowered;
        }
    }
    check(lowered == 0, std::to_string(lowered) + " scores lowered by an extra seed");

    // Terminal partition.
    const auto r = sim::simulate(worked48());
    std::set<std::string> seen;
    std::size_t listed = 0;
    for (const auto* list : {&r.profile.reds, &r.profile.oranges, &r.profile.greens}) {
        for (const auto& l : *list) {
            seen.insert(l.str());
            ++listed;
        }
    }
    check(listed == 48 && seen.size() == 48, "terminal lists do not partition the yard");
    for (const auto& s : r.profile.scores) {
        const auto& list = band(s.p) == Status::red ? r.profile.reds : band(s.p) == Status::orange ? r.profile.oranges : r.profile.greens;
        if (std::find(list.begin(), list.end(), s.label) == list.end()) check(false, s.label.str() + " in the wrong list");
    }
}

void learnability(Check& check) {
    knowledge::KnowledgeStore store;
    auto c = worked48();
    c.verify_knowledge = true;
    const auto first = sim::simulate(c, &store);
    const auto second = sim::simulate(c, &store);
    check(!first.replayed && first.inspections == 9, "first run should inspect");
    check(second.replayed, "second run not answered from the store");
    check(second.inspections == 0, "second run inspections " + std::to_string(second.inspections));
    check(second.profile == first.profile, "cached profile differs");
    const auto key = knowledge::canonical_key(c.scenario, first.phases.front().verdicts, 48, 4);
    check(key.hash() == first.knowledge_key, "knowledge key mismatch");
    check(store.verify(key), "replay check failed");

    sim::SimulationConfig s;
    s.population = 96;
    s.engine.seed = 3;
    s.verify_knowledge = true;
    const auto a = sim::simulate(s, &store);
    const auto b = sim::simulate(s, &store);
    check(!a.replayed && b.replayed && b.inspections == 0 && b.profile == a.profile, "scenario run not replayed");
}

void determinism(Check& check) {
    const auto a = sim::simulate(worked48()), b = sim::simulate(worked48());
    check(db::serialize(a.document) == db::serialize(b.document), "scripted DB bytes differ");
    check(db::export_tables(a.document, a.grid) == db::export_tables(b.document, b.grid), "scripted CSV bytes differ");

    sim::SimulationConfig c;
    c.population = 150;
    c.engine.seed = 42;
    c.engine.sampler = SamplerKind::quasi;
    c.scan_jitter = 0.25;
    c.scenario = "puncture";
    const auto x = sim::simulate(c), y = sim::simulate(c);
    check(db::serialize(x.document) == db::serialize(y.document), "seeded DB bytes differ");
    check(db::export_tables(x.document, x.grid) == db::export_tables(y.document, y.grid), "seeded CSV bytes differ");
    check(timing::chart_csv(timing::chart_series({{150, x.timing}})) == timing::chart_csv(timing::chart_series({{150, y.timing}})),
          "timing CSV differs");
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
        {"worked example structure", worked_structure},
        {"side lists per phase", table5_sides},
        {"classified ratio endpoints", ratio_endpoints},
        {"DB protocol example", db_protocol},
        {"timing model", timing_model},
        {"concurrent scanning", concurrency},
        {"banding", banding},
        {"estimator properties", estimator},
        {"learnability", learnability},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check check;
        try {
            criteria[i].second(check);
        } catch (const std::exception& e) {
            check(false, std::string("exception: ") + e.what());
        }
        const bool ok = check.failures.empty();
        std::cout << (ok ? "[PASS] " : "[FAIL] ") << i + 1 << ". " << criteria[i].first << "\n";
        for (const auto& f : check.failures) std::cout << "    " << f << "\n";
        for (const auto& n : check.notes) std::cout << "    note: " << n << "\n";
        if (!ok) ++failed;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
