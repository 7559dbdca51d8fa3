#include "cddsat/estimator.hpp"

#include "cddsat/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

namespace cddsat {

PScore::PScore(double value) : value_(value) {
    if (!(value >= 0.0 && value <= 1.0)) {
        throw ValidationError("P score must lie in [0, 1], got " + std::to_string(value));
    }
}

std::string_view to_string(Status status) {
    switch (status) {
        case Status::red: return "red";
        case Status::orange: return "orange";
        case Status::green: return "green";
    }
    return "green";
}

Status parse_status(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "red") return Status::red;
    if (lower == "orange") return Status::orange;
    if (lower == "green") return Status::green;
    throw ValidationError("unknown status '" + std::string(text) + "'; expected red, orange or green");
}

Status band(PScore p) {
    if (p.value() < 0.2) return Status::green;
    if (p.value() <= 0.5) return Status::orange;
    return Status::red;
}

PScore nominal_p(Status status) {
    switch (status) {
        case Status::red: return PScore(0.75);
        case Status::orange: return PScore(0.35);
        case Status::green: return PScore(0.10);
    }
    return PScore(0.10);
}

PScore influence(PScore seed_p, double d, double reach) {
    const double weight = std::min(1.0, reach / std::max(d, 1.0));
    return PScore(seed_p.value() * weight);
}

double propagation_reach(long population) { return std::sqrt(static_cast<double>(population)) + 1.0; }

std::optional<PScore> Profile::p_of(const ContainerLabel& label) const {
    for (const auto& s : scores) {
        if (s.label == label) return s.p;
    }
    return std::nullopt;
}

Profile profile_from_scores(std::vector<LabelScore> scores, const Grid& grid) {
    std::sort(scores.begin(), scores.end(), [&](const LabelScore& a, const LabelScore& b) {
        return grid.index_of(label_to_coord(a.label)) < grid.index_of(label_to_coord(b.label));
    });
    Profile profile;
    for (const auto& s : scores) {
        switch (band(s.p)) {
            case Status::red: profile.reds.push_back(s.label); break;
            case Status::orange: profile.oranges.push_back(s.label); break;
            case Status::green: profile.greens.push_back(s.label); break;
        }
    }
    profile.classified_ratio = static_cast<double>(scores.size()) / static_cast<double>(grid.population());
    profile.scores = std::move(scores);
    return profile;
}

Profile estimate(const std::vector<Verdict>& seeds, const Grid& grid, const EstimateOptions& options) {
    if (seeds.empty()) {
        throw ValidationError("estimation needs at least one measured container");
    }
    const long n = grid.population();
    std::vector<std::optional<PScore>> seed_at(static_cast<std::size_t>(n));
    std::vector<GridCoord> seed_coords;
    seed_coords.reserve(seeds.size());
    for (const auto& v : seeds) {
        const GridCoord c = label_to_coord(v.label);
        if (!grid.contains(c)) throw ValidationError("seed " + v.label.str() + " lies outside the grid");
        auto& slot = seed_at[static_cast<std::size_t>(grid.index_of(c))];
        if (slot) throw ValidationError("duplicate seed " + v.label.str());
        slot = v.p;
        seed_coords.push_back(c);
    }

    const double reach = propagation_reach(n);
    const Rect active = options.active.value_or(grid.bounds());

    std::vector<LabelScore> scores;
    for (long i = 0; i < n; ++i) {
        const GridCoord c = grid.coord_at(i);
        const auto& own = seed_at[static_cast<std::size_t>(i)];
        if (own) {
            scores.push_back({coord_to_label(c), *own, true});
            continue;
        }
        if (!options.terminal && active.contains(c)) continue;
        double best = 0.0;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            const double d = distance(c, seed_coords[s], options.metric);
            best = std::max(best, influence(seeds[s].p, d, reach).value());
        }
        scores.push_back({coord_to_label(c), PScore(best), false});
    }
    return profile_from_scores(std::move(scores), grid);
}

}  // namespace cddsat
