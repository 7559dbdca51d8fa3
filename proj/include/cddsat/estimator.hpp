#pragma once

#include "cddsat/grid.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cddsat {

// Damage probability in [0, 1].
class PScore {
public:
    constexpr PScore() = default;
    // Throws ValidationError outside [0, 1] (and for NaN).
    explicit PScore(double value);

    constexpr double value() const { return value_; }

    friend bool operator==(const PScore&, const PScore&) = default;
    friend auto operator<=>(const PScore&, const PScore&) = default;

private:
    double value_ = 0.0;
};

enum class Status { red, orange, green };

std::string_view to_string(Status status);
// Case-insensitive "red" / "orange" / "green". Throws ValidationError otherwise.
Status parse_status(std::string_view text);

// Green below 0.2, Orange on [0.2, 0.5], Red above 0.5.
Status band(PScore p);

// Representative score for a colour-only report: the middle of each band.
PScore nominal_p(Status status);

// Score a cell at distance `d` inherits from a seed of score `seed_p` when the
// propagation reach is `reach`: full strength inside the reach, then falling
// off as reach / d.
PScore influence(PScore seed_p, double d, double reach);

// A measured detection outcome for one container.
struct Verdict {
    ContainerLabel label;
    PScore p;

    Status status() const { return band(p); }

    static Verdict from_status(ContainerLabel label, Status status) { return {std::move(label), nominal_p(status)}; }

    friend bool operator==(const Verdict&, const Verdict&) = default;
};

struct LabelScore {
    ContainerLabel label;
    PScore p;
    bool seed = false;

    friend bool operator==(const LabelScore&, const LabelScore&) = default;
};

// Cumulative red/orange/green partition of the classified part of the yard.
struct Profile {
    std::vector<ContainerLabel> reds;
    std::vector<ContainerLabel> oranges;
    std::vector<ContainerLabel> greens;
    double classified_ratio = 0.0;
    // Classified containers in yard order.
    std::vector<LabelScore> scores;

    std::size_t classified() const { return reds.size() + oranges.size() + greens.size(); }
    std::optional<PScore> p_of(const ContainerLabel& label) const;

    friend bool operator==(const Profile&, const Profile&) = default;
};

struct EstimateOptions {
    // Region still under triangulation. Containers outside it have been sorted
    // out of the active array and are classified. Defaults to the whole grid.
    std::optional<Rect> active;
    // The last phase classifies every container.
    bool terminal = false;
    Metric metric = Metric::euclidean;
};

// Propagation reach for a yard of `population` containers: sqrt(n) + 1.
double propagation_reach(long population);

// Builds the cumulative profile from all seeds measured so far. Seeds keep their
// own score; every other classified container takes the strongest influence of
// any seed. Throws ValidationError on an empty seed list, duplicate seeds, or
// seeds outside the grid.
Profile estimate(const std::vector<Verdict>& seeds, const Grid& grid, const EstimateOptions& options = {});

// Builds a profile from explicit per-label scores (no propagation).
Profile profile_from_scores(std::vector<LabelScore> scores, const Grid& grid);

}  // namespace cddsat
