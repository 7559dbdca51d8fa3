#include "cddsat/error.hpp"
#include "cddsat/timing.hpp"

#include <doctest.h>

#include <json.hpp>
#include <random>

using namespace cddsat;
using namespace cddsat::timing;

TEST_CASE("baseline and savings arithmetic") {
    CHECK(baseline_time(48, 12.5554) == doctest::Approx(602.6592));
    CHECK(t_saved(602.6592, 112.9986) == doctest::Approx(489.6606));
    CHECK(t_saved(10.0, 12.0) == -2.0);
    CHECK_THROWS_AS(baseline_time(0, 1.0), ValidationError);
    CHECK_THROWS_AS(baseline_time(5, 0.0), ValidationError);
}

TEST_CASE("reports sum sorting and detection time per phase") {
    std::vector<PhaseTiming> phases(3, PhaseTiming{0.5, {10.0, 20.0, 30.0}});
    const auto seq = make_report(phases, ScanMode::sequential, 48, 12.5554);
    CHECK(seq.t_d == doctest::Approx(3 * (0.5 + 60.0)));
    CHECK(seq.t_saved == doctest::Approx(seq.t_other - seq.t_d));
    const auto conc = make_report(phases, ScanMode::concurrent, 48, 12.5554);
    CHECK(conc.t_d == doctest::Approx(3 * (0.5 + 30.0)));
    CHECK(conc.t_d_in(ScanMode::sequential) == seq.t_d);

    const auto empty = make_report({}, ScanMode::sequential, 9, 2.0);
    CHECK(empty.t_d == 0.0);
    CHECK(empty.t_other == 18.0);
}

TEST_CASE("equal scans run three times faster concurrently") {
    for (int phases = 1; phases <= 6; ++phases) {
        std::vector<PhaseTiming> p(static_cast<std::size_t>(phases), PhaseTiming{0.0, {7.25, 7.25, 7.25}});
        const auto r = make_report(p, ScanMode::sequential, 100, 7.25);
        CHECK(r.t_d_in(ScanMode::concurrent) * 3.0 == doctest::Approx(r.t_d_in(ScanMode::sequential)));
    }
}

TEST_CASE("concurrent never exceeds sequential") {
    std::mt19937 rng(8);
    std::uniform_real_distribution<double> d(0.1, 100.0);
    std::uniform_int_distribution<int> count(1, 12);
    for (int i = 0; i < 2000; ++i) {
        std::vector<double> scans(static_cast<std::size_t>(count(rng)));
        for (auto& s : scans) s = d(rng);
        const double seq = sdd::scan_time(scans, ScanMode::sequential);
        const double conc = sdd::scan_time(scans, ScanMode::concurrent);
        CHECK(conc <= seq);
        CHECK(conc * 3.0 >= seq - 1e-9);
    }
}

TEST_CASE("chart series") {
    const auto r48 = make_report(std::vector<PhaseTiming>(3, PhaseTiming{0.0, {12.5554, 12.5554, 12.5554}}),
                                 ScanMode::sequential, 48, 12.5554);
    const auto r9 = make_report(std::vector<PhaseTiming>(3, PhaseTiming{0.0, {1.0, 1.0, 1.0}}), ScanMode::sequential, 9, 1.0);
    const auto rows = chart_series({{48, r48}, {9, r9}});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n == 9);
    CHECK(rows[0].t_saved == 0.0);
    CHECK(rows[1].t_d_conc * 3.0 == doctest::Approx(rows[1].t_d_seq));

    const std::string csv = chart_csv(rows);
    CHECK(csv.rfind("n,t_other,t_d_seq,t_d_conc,t_saved\n9,9,9,3,0\n48,", 0) == 0);
    const auto js = nlohmann::json::parse(chart_json(rows));
    CHECK(js.size() == 2);
    CHECK(js[1]["n"] == 48);

    CHECK_THROWS_AS(chart_series({}), ValidationError);
    CHECK_THROWS_AS(chart_series({{9, r9}, {9, r9}}), ValidationError);
}

TEST_CASE("stopwatch measures non-negative spans") {
    Stopwatch w;
    w.start();
    CHECK(w.stop() >= 0.0);
}
