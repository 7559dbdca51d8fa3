#pragma once

#include "cddsat/sdd.hpp"

#include <chrono>
#include <string>
#include <utility>
#include <vector>

namespace cddsat::timing {

using sdd::ScanMode;

struct PhaseTiming {
    double sorting_seconds = 0.0;
    std::vector<double> scan_seconds;  // one entry per inspection, in side order

    double detection_seconds(ScanMode mode) const { return sdd::scan_time(scan_seconds, mode); }

    friend bool operator==(const PhaseTiming&, const PhaseTiming&) = default;
};

struct TimingReport {
    ScanMode mode = ScanMode::sequential;
    std::vector<PhaseTiming> per_phase;
    double t_other = 0.0;  // inspect-every-container baseline
    double t_d = 0.0;      // SAT sorting + detection under `mode`
    double t_saved = 0.0;  // t_other - t_d; negative when SAT was slower

    double t_d_in(ScanMode m) const;
};

// T_saved = T_other - T_D.
double t_saved(double t_other, double t_d);

// Time to inspect all `population` containers one by one.
double baseline_time(long population, double mean_scan_seconds);

TimingReport make_report(std::vector<PhaseTiming> per_phase, ScanMode mode, long population,
                         double mean_scan_seconds);

struct ChartRow {
    long n = 0;
    double t_other = 0.0;
    double t_d_seq = 0.0;
    double t_d_conc = 0.0;
    double t_saved = 0.0;

    friend bool operator==(const ChartRow&, const ChartRow&) = default;
};

// One row per run, sorted by n. Throws ValidationError on an empty list or a
// repeated n.
std::vector<ChartRow> chart_series(const std::vector<std::pair<long, TimingReport>>& runs);

// Header "n,t_other,t_d_seq,t_d_conc,t_saved".
std::string chart_csv(const std::vector<ChartRow>& rows);
std::string chart_json(const std::vector<ChartRow>& rows);

// Start/stop timer for live sessions.
class Stopwatch {
public:
    void start() { begin_ = std::chrono::steady_clock::now(); }
    double stop() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - begin_).count();
    }

private:
    std::chrono::steady_clock::time_point begin_ = std::chrono::steady_clock::now();
};

}  // namespace cddsat::timing
