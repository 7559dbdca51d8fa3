#include "cddsat/grid.hpp"

#include "cddsat/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

namespace cddsat {

namespace {

// Keeps column and row indices inside int range: 6 letters < 26^6 * 2, 9 digits < 10^9.
constexpr std::size_t kMaxLetters = 6;
constexpr std::size_t kMaxDigits = 9;

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_digit(char c) { return c >= '0' && c <= '9'; }

}  // namespace

ContainerLabel ContainerLabel::parse(std::string_view text) {
    std::size_t letters = 0;
    while (letters < text.size() && is_upper(text[letters])) ++letters;
    const std::size_t digits = text.size() - letters;
    if (letters == 0 || letters > kMaxLetters || digits == 0 || digits > kMaxDigits) {
        throw LabelError(std::string(text));
    }
    if (!std::all_of(text.begin() + letters, text.end(), is_digit) || text[letters] == '0') {
        throw LabelError(std::string(text));
    }
    return ContainerLabel(std::string(text));
}

std::string column_name(int col) {
    std::string name;
    for (long n = static_cast<long>(col) + 1; n > 0; n = (n - 1) / 26) {
        name.insert(name.begin(), static_cast<char>('A' + (n - 1) % 26));
    }
    return name;
}

GridCoord label_to_coord(const ContainerLabel& label) {
    const std::string& text = label.str();
    GridCoord coord;
    long col = 0;
    std::size_t i = 0;
    for (; i < text.size() && is_upper(text[i]); ++i) col = col * 26 + (text[i] - 'A' + 1);
    coord.col = static_cast<int>(col - 1);
    coord.row = static_cast<int>(std::strtol(text.c_str() + i, nullptr, 10) - 1);
    return coord;
}

GridCoord label_to_coord(std::string_view text) { return label_to_coord(ContainerLabel::parse(text)); }

ContainerLabel coord_to_label(GridCoord coord) {
    return ContainerLabel(column_name(coord.col) + std::to_string(coord.row + 1));
}

std::vector<GridCoord> Rect::cells() const {
    std::vector<GridCoord> out;
    out.reserve(static_cast<std::size_t>(area()));
    for (int r = row_lo; r <= row_hi; ++r) {
        for (int c = col_lo; c <= col_hi; ++c) out.push_back({c, r});
    }
    return out;
}

Grid Grid::build(long population, int cols) {
    if (cols < 1) {
        throw ValidationError("column count must be at least 1, got " + std::to_string(cols));
    }
    if (population < 1) {
        throw ValidationError("population must be at least 1, got " + std::to_string(population));
    }
    if (population % cols != 0) {
        throw ValidationError("population " + std::to_string(population) + " is not divisible by " +
                              std::to_string(cols) + " columns");
    }
    const long rows = population / cols;
    if (rows > 999'999'999) throw ValidationError("grid has too many rows");
    return Grid(cols, static_cast<int>(rows));
}

bool Grid::contains(const ContainerLabel& label) const { return contains(label_to_coord(label)); }

std::vector<ContainerLabel> Grid::labels() const {
    std::vector<ContainerLabel> out;
    out.reserve(static_cast<std::size_t>(population()));
    for (GridCoord c : bounds().cells()) out.push_back(coord_to_label(c));
    return out;
}

Metric parse_metric(std::string_view name) {
    if (name == "euclidean") return Metric::euclidean;
    if (name == "chebyshev") return Metric::chebyshev;
    throw ValidationError("unknown distance metric '" + std::string(name) + "'");
}

std::string_view to_string(Metric metric) {
    return metric == Metric::euclidean ? "euclidean" : "chebyshev";
}

double distance(GridCoord a, GridCoord b, Metric metric) {
    const double dx = std::abs(a.col - b.col);
    const double dy = std::abs(a.row - b.row);
    if (metric == Metric::chebyshev) return std::max(dx, dy);
    return std::hypot(dx, dy);
}

}  // namespace cddsat
