#include "cddsat/error.hpp"
#include "cddsat/grid.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

using namespace cddsat;

TEST_CASE("column names follow spreadsheet order") {
    // Enumerate A..Z, AA..ZZ, AAA..ZZZ by brute force and compare.
    std::vector<std::string> names;
    for (int len = 1; len <= 3; ++len) {
        std::string s(len, 'A');
        while (true) {
            names.push_back(s);
            int i = len - 1;
            while (i >= 0 && s[i] == 'Z') s[i--] = 'A';
            if (i < 0) break;
            ++s[i];
        }
    }
    REQUIRE(names.size() == 26 + 26 * 26 + 26 * 26 * 26);
    for (std::size_t i = 0; i < names.size(); ++i) {
        CHECK(column_name(static_cast<int>(i)) == names[i]);
    }
}

TEST_CASE("labels round-trip through coordinates") {
    CHECK(label_to_coord("A1") == GridCoord{0, 0});
    CHECK(label_to_coord("D12") == GridCoord{3, 11});
    CHECK(label_to_coord("AA3") == GridCoord{26, 2});
    CHECK(coord_to_label({7, 6}).str() == "H7");

    std::mt19937 rng(7);
    std::uniform_int_distribution<int> col(0, 20000), row(0, 1'000'000);
    for (int i = 0; i < 2000; ++i) {
        const GridCoord c{col(rng), row(rng)};
        const auto label = coord_to_label(c);
        CHECK(label_to_coord(label) == c);
        CHECK(ContainerLabel::parse(label.str()) == label);
    }
}

TEST_CASE("malformed labels are rejected") {
    for (const char* bad : {"", "A", "1", "a1", "A0", "A01", "1A", "A1B", "A-1", "A 1", "ABCDEFG1", "A1234567890"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(ContainerLabel::parse(bad), LabelError);
    }
    CHECK_NOTHROW(ContainerLabel::parse("ABCDEF123456789"));
}

TEST_CASE("grid shapes") {
    const Grid g = Grid::build(48, 4);
    CHECK(g.cols() == 4);
    CHECK(g.rows() == 12);
    CHECK(g.population() == 48);
    CHECK(g.contains(ContainerLabel::parse("D12")));
    CHECK_FALSE(g.contains(ContainerLabel::parse("E1")));
    CHECK_FALSE(g.contains(ContainerLabel::parse("A13")));

    CHECK_THROWS_AS(Grid::build(48, 5), ValidationError);
    CHECK_THROWS_AS(Grid::build(0, 1), ValidationError);
    CHECK_THROWS_AS(Grid::build(10, 0), ValidationError);
}

TEST_CASE("yard order runs row by row from the bottom") {
    const Grid g = Grid::build(56, 8);
    const auto labels = g.labels();
    REQUIRE(labels.size() == 56);
    CHECK(labels[0].str() == "A1");
    CHECK(labels[7].str() == "H1");
    CHECK(labels[8].str() == "A2");
    CHECK(labels.back().str() == "H7");
    for (long i = 0; i < g.population(); ++i) {
        CHECK(g.index_of(g.coord_at(i)) == i);
        CHECK(label_to_coord(labels[static_cast<std::size_t>(i)]) == g.coord_at(i));
    }
    const std::set<ContainerLabel> unique(labels.begin(), labels.end());
    CHECK(unique.size() == labels.size());
}

TEST_CASE("rect geometry") {
    const Rect r{1, 3, 2, 5};
    CHECK(r.width() == 3);
    CHECK(r.height() == 4);
    CHECK(r.area() == 12);
    CHECK(r.cells().size() == 12);
    CHECK(r.contains(GridCoord{1, 2}));
    CHECK_FALSE(r.contains(GridCoord{0, 2}));
    CHECK(r.contains(Rect{2, 3, 3, 4}));
    CHECK_FALSE(r.contains(Rect{0, 3, 3, 4}));
}

TEST_CASE("distance metrics") {
    CHECK(distance({0, 0}, {3, 4}) == doctest::Approx(5.0));
    CHECK(distance({0, 0}, {3, 4}, Metric::chebyshev) == 4.0);
    CHECK(distance({2, 2}, {2, 2}) == 0.0);
    CHECK(parse_metric("chebyshev") == Metric::chebyshev);
    CHECK(to_string(Metric::euclidean) == "euclidean");
    CHECK_THROWS_AS(parse_metric("manhattan"), ValidationError);

    std::mt19937 rng(3);
    std::uniform_int_distribution<int> u(-50, 50);
    for (int i = 0; i < 500; ++i) {
        const GridCoord a{u(rng), u(rng)}, b{u(rng), u(rng)}, c{u(rng), u(rng)};
        for (Metric m : {Metric::euclidean, Metric::chebyshev}) {
            CHECK(distance(a, b, m) == doctest::Approx(distance(b, a, m)));
            CHECK(distance(a, c, m) <= distance(a, b, m) + distance(b, c, m) + 1e-9);
        }
    }
}
