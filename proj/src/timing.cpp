#include "cddsat/timing.hpp"

#include "cddsat/csv.hpp"
#include "cddsat/error.hpp"

#include <algorithm>
#include <json.hpp>
#include <set>

namespace cddsat::timing {

double TimingReport::t_d_in(ScanMode m) const {
    double total = 0.0;
    for (const auto& p : per_phase) total += p.sorting_seconds + p.detection_seconds(m);
    return total;
}

double t_saved(double t_other, double t_d) { return t_other - t_d; }

double baseline_time(long population, double mean_scan_seconds) {
    if (population < 1) throw ValidationError("baseline needs a population of at least 1");
    if (!(mean_scan_seconds > 0.0)) throw ValidationError("mean scan time must be positive");
    return static_cast<double>(population) * mean_scan_seconds;
}

TimingReport make_report(std::vector<PhaseTiming> per_phase, ScanMode mode, long population,
                         double mean_scan_seconds) {
    TimingReport r;
    r.mode = mode;
    r.per_phase = std::move(per_phase);
    r.t_other = baseline_time(population, mean_scan_seconds);
    r.t_d = r.t_d_in(mode);
    r.t_saved = t_saved(r.t_other, r.t_d);
    return r;
}

std::vector<ChartRow> chart_series(const std::vector<std::pair<long, TimingReport>>& runs) {
    if (runs.empty()) throw ValidationError("chart series needs at least one run");
    std::set<long> seen;
    std::vector<ChartRow> rows;
    for (const auto& [n, report] : runs) {
        if (!seen.insert(n).second) throw ValidationError("duplicate population " + std::to_string(n) + " in series");
        rows.push_back({n, report.t_other, report.t_d_in(ScanMode::sequential), report.t_d_in(ScanMode::concurrent),
                        t_saved(report.t_other, report.t_d)});
    }
    std::sort(rows.begin(), rows.end(), [](const ChartRow& a, const ChartRow& b) { return a.n < b.n; });
    return rows;
}

std::string chart_csv(const std::vector<ChartRow>& rows) {
    std::string out = "n,t_other,t_d_seq,t_d_conc,t_saved\n";
    for (const auto& r : rows) {
        out += csv::row({std::to_string(r.n), csv::number(r.t_other), csv::number(r.t_d_seq), csv::number(r.t_d_conc),
                         csv::number(r.t_saved)}) +
               "\n";
    }
    return out;
}

std::string chart_json(const std::vector<ChartRow>& rows) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : rows) {
        arr.push_back({{"n", r.n},
                       {"t_other", r.t_other},
                       {"t_d_seq", r.t_d_seq},
                       {"t_d_conc", r.t_d_conc},
                       {"t_saved", r.t_saved}});
    }
    return arr.dump();
}

}  // namespace cddsat::timing
