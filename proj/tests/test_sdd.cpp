#include "cddsat/error.hpp"
#include "cddsat/sdd.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cddsat;
using namespace cddsat::sdd;

TEST_CASE("binarization counts pixels at or above the threshold") {
    const ImageRaster img(4, 1, {0, 127, 128, 255});
    const auto b = binarize(img, 128);
    CHECK(b.mask == std::vector<bool>{false, false, true, true});
    CHECK(b.damage_fraction == 0.5);
    CHECK(binarize(img, 0).damage_fraction == 1.0);
    CHECK_THROWS_AS(binarize(img, 256), ValidationError);
}

TEST_CASE("surface metrics") {
    const SurfaceMap s(2, 2, {1.0, -1.0, 1.0, -1.0});
    CHECK(roughness(s) == doctest::Approx(1.0));
    CHECK(max_depth(s) == doctest::Approx(2.0));
    CHECK(roughness(SurfaceMap::flat(3, 3, 4.0)) == 0.0);
    CHECK(max_depth(SurfaceMap::flat(3, 3, 4.0)) == 0.0);
}

TEST_CASE("raster validation") {
    CHECK_THROWS_AS(ImageRaster(2, 2, {1, 2, 3}), ValidationError);
    CHECK_THROWS_AS(ImageRaster(0, 1, {}), ValidationError);
    CHECK_THROWS_AS(SurfaceMap(1, 1, {std::nan("")}), ValidationError);
    CHECK_THROWS_AS(SurfaceMap::flat(-1, 2), ValidationError);
}

TEST_CASE("pristine measurements score zero") {
    const PScore p = sdd_score(ImageRaster::filled(8, 8, 10), SurfaceMap::flat(4, 4));
    CHECK(p.value() == 0.0);
    CHECK(band(p) == Status::green);
}

TEST_CASE("score is the weighted sum of capped metrics") {
    SddParams params;
    // Half the pixels damaged, roughness 1 (cap 5), depth 2 (cap 20).
    const ImageRaster img(2, 1, {200, 0});
    const SurfaceMap surf(2, 2, {1.0, -1.0, 1.0, -1.0});
    const double expected = 0.5 * 0.5 + 0.25 * (1.0 / 5.0) + 0.25 * (2.0 / 20.0);
    CHECK(sdd_score(img, surf, params).value() == doctest::Approx(expected));

    // Caps saturate.
    const SurfaceMap rough(2, 1, {-50.0, 50.0});
    CHECK(sdd_score(ImageRaster::filled(2, 2, 255), rough, params).value() == doctest::Approx(1.0));

    std::mt19937 rng(4);
    std::uniform_int_distribution<int> px(0, 255);
    std::uniform_real_distribution<double> h(-30.0, 30.0);
    for (int i = 0; i < 200; ++i) {
        std::vector<std::uint8_t> pixels(16);
        for (auto& p : pixels) p = static_cast<std::uint8_t>(px(rng));
        std::vector<double> heights(9);
        for (auto& x : heights) x = h(rng);
        const double p = sdd_score(ImageRaster(4, 4, pixels), SurfaceMap(3, 3, heights)).value();
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
    }
}

TEST_CASE("parameter validation") {
    SddParams p;
    CHECK_NOTHROW(p.validate());
    p.weight_depth = 0.5;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = {};
    p.weight_roughness = -0.25;
    p.weight_binarization = 1.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = {};
    p.depth_cap_mm = 0.0;
    CHECK_THROWS_AS(p.validate(), ValidationError);
    p = {};
    p.threshold = -1;
    CHECK_THROWS_AS(p.validate(), ValidationError);
}

TEST_CASE("scan time by mode") {
    CHECK(scan_time({10, 20, 30}, ScanMode::sequential) == 60.0);
    CHECK(scan_time({10, 20, 30}, ScanMode::concurrent) == 30.0);
    CHECK(scan_time({10, 20, 30, 5}, ScanMode::concurrent) == 35.0);
    CHECK(scan_time({}, ScanMode::concurrent) == 0.0);

    ScanPlan plan{{ContainerLabel::parse("A1")}, ScanMode::sequential, {}};
    CHECK_THROWS_AS(scan_time(plan), ValidationError);
    plan.per_scan_seconds = {0.0};
    CHECK_THROWS_AS(scan_time(plan), ValidationError);
    plan.per_scan_seconds = {4.5};
    CHECK(scan_time(plan) == 4.5);
    CHECK(parse_scan_mode("concurrent") == ScanMode::concurrent);
    CHECK_THROWS_AS(parse_scan_mode("parallel"), ValidationError);
}

TEST_CASE("pgm and surface files round-trip") {
    const ImageRaster img(3, 2, {0, 10, 20, 30, 40, 255});
    const ImageRaster back = read_pgm(write_pgm(img));
    CHECK(back.pixels() == img.pixels());
    CHECK(back.width() == 3);

    const ImageRaster scaled = read_pgm("P2 # comment\n2 1\n15\n0 15\n");
    CHECK(scaled.pixels() == std::vector<std::uint8_t>{0, 255});
    CHECK_THROWS_AS(read_pgm("P5 1 1 255 0"), ValidationError);
    CHECK_THROWS_AS(read_pgm("P2 2 2 255 0 0 0"), ValidationError);
    CHECK_THROWS_AS(read_pgm("P2 1 1 255 300"), ValidationError);

    const SurfaceMap s(2, 2, {0.1, -2.5, 3.0, 1e-3});
    CHECK(read_surface(write_surface(s)).heights() == s.heights());
    CHECK_THROWS_AS(read_surface("2 2 1 2 3"), ValidationError);
}

TEST_CASE("scenario models are seeded and consistent") {
    const Grid g = Grid::build(48, 4);
    for (Scenario sc : {Scenario::rust_oxidation, Scenario::puncture, Scenario::pristine}) {
        CAPTURE(to_string(sc));
        const ScenarioModel a(sc, 9, g), b(sc, 9, g);
        for (const auto& l : g.labels()) CHECK(a.detect(l) == b.detect(l));
        CHECK(parse_scenario(to_string(sc)) == sc);
    }
    const ScenarioModel pristine(Scenario::pristine, 1, g);
    for (const auto& l : g.labels()) CHECK(pristine.detect(l).p.value() == 0.0);

    const ScenarioModel rust(Scenario::rust_oxidation, 3, g);
    int damaged = 0;
    for (const auto& l : g.labels()) damaged += rust.damage_level(label_to_coord(l)) > 0.0;
    CHECK(damaged > 0);
    CHECK_THROWS_AS(rust.detect(ContainerLabel::parse("E1")), ValidationError);
    CHECK_THROWS_AS(parse_scenario("flood"), ValidationError);
}
