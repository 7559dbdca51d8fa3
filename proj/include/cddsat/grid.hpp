#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace cddsat {

// Zero-based cell address. Row 0 is the bottom row of the yard ("1" in labels).
struct GridCoord {
    int col = 0;
    int row = 0;

    friend auto operator<=>(const GridCoord&, const GridCoord&) = default;
};

// Column letters followed by a 1-based row number: "A1", "D12", "AA3".
class ContainerLabel {
public:
    ContainerLabel() = default;

    // Throws LabelError if `text` is not a valid label.
    static ContainerLabel parse(std::string_view text);

    const std::string& str() const { return text_; }

    friend bool operator==(const ContainerLabel&, const ContainerLabel&) = default;
    friend auto operator<=>(const ContainerLabel&, const ContainerLabel&) = default;

private:
    explicit ContainerLabel(std::string text) : text_(std::move(text)) {}
    friend ContainerLabel coord_to_label(GridCoord coord);

    std::string text_;
};

// Bijective base-26 column name: 0 -> "A", 25 -> "Z", 26 -> "AA".
std::string column_name(int col);

GridCoord label_to_coord(const ContainerLabel& label);
GridCoord label_to_coord(std::string_view text);
ContainerLabel coord_to_label(GridCoord coord);

// Inclusive rectangle of cells.
struct Rect {
    int col_lo = 0;
    int col_hi = 0;
    int row_lo = 0;
    int row_hi = 0;

    int width() const { return col_hi - col_lo + 1; }
    int height() const { return row_hi - row_lo + 1; }
    long area() const { return static_cast<long>(width()) * height(); }
    bool contains(GridCoord c) const {
        return c.col >= col_lo && c.col <= col_hi && c.row >= row_lo && c.row <= row_hi;
    }
    // True if `other` lies inside this rect.
    bool contains(const Rect& other) const {
        return other.col_lo >= col_lo && other.col_hi <= col_hi && other.row_lo >= row_lo &&
               other.row_hi <= row_hi;
    }

    // Cells in yard order: rows ascending, columns ascending within a row.
    std::vector<GridCoord> cells() const;

    friend bool operator==(const Rect&, const Rect&) = default;
};

class Grid {
public:
    // Throws ValidationError unless cols >= 1, population >= 1 and cols divides population.
    static Grid build(long population, int cols);

    int cols() const { return cols_; }
    int rows() const { return rows_; }
    long population() const { return static_cast<long>(cols_) * rows_; }

    bool contains(GridCoord c) const { return c.col >= 0 && c.col < cols_ && c.row >= 0 && c.row < rows_; }
    bool contains(const ContainerLabel& label) const;
    Rect bounds() const { return Rect{0, cols_ - 1, 0, rows_ - 1}; }

    // Index in yard order (row-major from the bottom row).
    long index_of(GridCoord c) const { return static_cast<long>(c.row) * cols_ + c.col; }
    GridCoord coord_at(long index) const {
        return GridCoord{static_cast<int>(index % cols_), static_cast<int>(index / cols_)};
    }

    // All labels in yard order: A1, B1, ..., A2, B2, ...
    std::vector<ContainerLabel> labels() const;

    friend bool operator==(const Grid&, const Grid&) = default;

private:
    Grid(int cols, int rows) : cols_(cols), rows_(rows) {}

    int cols_ = 1;
    int rows_ = 1;
};

enum class Metric { euclidean, chebyshev };

Metric parse_metric(std::string_view name);
std::string_view to_string(Metric metric);

double distance(GridCoord a, GridCoord b, Metric metric = Metric::euclidean);

}  // namespace cddsat
