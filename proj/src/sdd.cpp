#include "cddsat/sdd.hpp"

#include "cddsat/error.hpp"
#include "cddsat/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace cddsat::sdd {

namespace {

void check_dims(int width, int height, std::size_t count, const char* what) {
    if (width < 1 || height < 1) throw ValidationError(std::string(what) + " dimensions must be at least 1x1");
    if (count != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw ValidationError(std::string(what) + " has " + std::to_string(count) + " values, expected " +
                              std::to_string(static_cast<long long>(width) * height));
    }
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Whitespace-separated tokens with '#' comments running to end of line.
std::vector<std::string_view> tokenize(std::string_view text) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < text.size()) {
        const char c = text[i];
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
        } else {
            const std::size_t start = i;
            while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i])) && text[i] != '#') ++i;
            out.push_back(text.substr(start, i - start));
        }
    }
    return out;
}

template <typename T>
T to_number(std::string_view token, const char* what) {
    T value{};
    auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || end != token.data() + token.size()) {
        throw ValidationError(std::string("malformed ") + what + " '" + std::string(token) + "'");
    }
    return value;
}

}  // namespace

ImageRaster::ImageRaster(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
    check_dims(width_, height_, pixels_.size(), "image");
}

ImageRaster ImageRaster::filled(int width, int height, std::uint8_t value) {
    check_dims(width, height, static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), "image");
    return ImageRaster(width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, value));
}

SurfaceMap::SurfaceMap(int width, int height, std::vector<double> heights)
    : width_(width), height_(height), heights_(std::move(heights)) {
    check_dims(width_, height_, heights_.size(), "surface");
    if (!std::all_of(heights_.begin(), heights_.end(), [](double h) { return std::isfinite(h); })) {
        throw ValidationError("surface elevations must be finite");
    }
}

SurfaceMap SurfaceMap::flat(int width, int height, double level) {
    check_dims(width, height, static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), "surface");
    return SurfaceMap(width, height, std::vector<double>(static_cast<std::size_t>(width) * height, level));
}

BinarizedImage binarize(const ImageRaster& image, int threshold) {
    if (threshold < 0 || threshold > 255) throw ValidationError("threshold must lie in 0..255");
    BinarizedImage out;
    out.mask.reserve(image.pixels().size());
    std::size_t set = 0;
    for (std::uint8_t px : image.pixels()) {
        const bool hit = px >= threshold;
        out.mask.push_back(hit);
        set += hit;
    }
    out.damage_fraction = static_cast<double>(set) / static_cast<double>(image.pixels().size());
    return out;
}

double roughness(const SurfaceMap& surface) {
    const auto& h = surface.heights();
    double mean = 0.0;
    for (double v : h) mean += v;
    mean /= static_cast<double>(h.size());
    double sq = 0.0;
    for (double v : h) sq += (v - mean) * (v - mean);
    return std::sqrt(sq / static_cast<double>(h.size()));
}

double max_depth(const SurfaceMap& surface) {
    const auto [lo, hi] = std::minmax_element(surface.heights().begin(), surface.heights().end());
    return *hi - *lo;
}

void SddParams::validate() const {
    if (threshold < 0 || threshold > 255) throw ValidationError("threshold must lie in 0..255");
    const double weights[] = {weight_binarization, weight_roughness, weight_depth};
    for (double w : weights) {
        if (!(w >= 0.0)) throw ValidationError("SDD weights must be non-negative");
    }
    if (std::abs(weights[0] + weights[1] + weights[2] - 1.0) > 1e-9) {
        throw ValidationError("SDD weights must sum to 1");
    }
    if (!(roughness_cap_mm > 0.0) || !(depth_cap_mm > 0.0)) {
        throw ValidationError("roughness and depth caps must be positive");
    }
}

PScore sdd_score(const ImageRaster& image, const SurfaceMap& surface, const SddParams& params) {
    params.validate();
    const double fraction = binarize(image, params.threshold).damage_fraction;
    const double rough = roughness(surface);
    const double depth = max_depth(surface);
    // Ordinary container shape: nothing to analyse further.
    if (fraction == 0.0 && rough == 0.0 && depth == 0.0) return PScore(0.0);
    const double p = params.weight_binarization * fraction +
                     params.weight_roughness * std::min(1.0, rough / params.roughness_cap_mm) +
                     params.weight_depth * std::min(1.0, depth / params.depth_cap_mm);
    return PScore(std::clamp(p, 0.0, 1.0));
}

ScanMode parse_scan_mode(std::string_view name) {
    if (name == "sequential") return ScanMode::sequential;
    if (name == "concurrent") return ScanMode::concurrent;
    throw ValidationError("unknown scan mode '" + std::string(name) + "'");
}

std::string_view to_string(ScanMode mode) { return mode == ScanMode::sequential ? "sequential" : "concurrent"; }

void ScanPlan::validate() const {
    if (per_scan_seconds.size() != targets.size()) {
        throw ValidationError("scan plan needs one duration per target");
    }
    for (double d : per_scan_seconds) {
        if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError("scan durations must be positive");
    }
}

double scan_time(const ScanPlan& plan) {
    plan.validate();
    return scan_time(plan.per_scan_seconds, plan.mode);
}

double scan_time(const std::vector<double>& durations, ScanMode mode) {
    double total = 0.0;
    if (mode == ScanMode::sequential) {
        for (double d : durations) total += d;
        return total;
    }
    for (std::size_t i = 0; i < durations.size(); i += 3) {
        const std::size_t end = std::min(i + 3, durations.size());
        total += *std::max_element(durations.begin() + static_cast<long>(i), durations.begin() + static_cast<long>(end));
    }
    return total;
}

ImageRaster read_pgm(std::string_view text) {
    const auto tokens = tokenize(text);
    if (tokens.size() < 4 || tokens[0] != "P2") throw ValidationError("not a plain PGM (P2) image");
    const int width = to_number<int>(tokens[1], "PGM width");
    const int height = to_number<int>(tokens[2], "PGM height");
    const int maxval = to_number<int>(tokens[3], "PGM maxval");
    if (maxval < 1 || maxval > 65535) throw ValidationError("PGM maxval out of range");
    if (width < 1 || height < 1) throw ValidationError("PGM dimensions must be at least 1x1");
    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (tokens.size() - 4 != count) {
        throw ValidationError("PGM has " + std::to_string(tokens.size() - 4) + " samples, expected " +
                              std::to_string(count));
    }
    std::vector<std::uint8_t> pixels;
    pixels.reserve(count);
    for (std::size_t i = 4; i < tokens.size(); ++i) {
        const int v = to_number<int>(tokens[i], "PGM sample");
        if (v < 0 || v > maxval) throw ValidationError("PGM sample out of range");
        pixels.push_back(static_cast<std::uint8_t>(maxval == 255 ? v : std::lround(v * 255.0 / maxval)));
    }
    return ImageRaster(width, height, std::move(pixels));
}

ImageRaster load_pgm(const std::filesystem::path& path) { return read_pgm(read_file(path)); }

std::string write_pgm(const ImageRaster& image) {
    std::string out = "P2\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
    for (int y = 0; y < image.height(); ++y) {
        for (int x = 0; x < image.width(); ++x) {
            if (x) out += ' ';
            out += std::to_string(image.at(x, y));
        }
        out += '\n';
    }
    return out;
}

std::string write_surface(const SurfaceMap& surface) {
    std::ostringstream out;
    out.precision(17);
    out << surface.width() << ' ' << surface.height() << '\n';
    for (int y = 0; y < surface.height(); ++y) {
        for (int x = 0; x < surface.width(); ++x) {
            if (x) out << ' ';
            out << surface.heights()[static_cast<std::size_t>(y) * surface.width() + x];
        }
        out << '\n';
    }
    return out.str();
}

SurfaceMap read_surface(std::string_view text) {
    const auto tokens = tokenize(text);
    if (tokens.size() < 2) throw ValidationError("surface grid needs a 'width height' header");
    const int width = to_number<int>(tokens[0], "surface width");
    const int height = to_number<int>(tokens[1], "surface height");
    if (width < 1 || height < 1) throw ValidationError("surface dimensions must be at least 1x1");
    std::vector<double> heights;
    heights.reserve(tokens.size() - 2);
    for (std::size_t i = 2; i < tokens.size(); ++i) heights.push_back(to_number<double>(tokens[i], "elevation"));
    return SurfaceMap(width, height, std::move(heights));
}

SurfaceMap load_surface(const std::filesystem::path& path) { return read_surface(read_file(path)); }

Scenario parse_scenario(std::string_view name) {
    if (name == "rust_oxidation") return Scenario::rust_oxidation;
    if (name == "puncture") return Scenario::puncture;
    if (name == "pristine") return Scenario::pristine;
    throw ValidationError("unknown scenario '" + std::string(name) + "'");
}

std::string_view to_string(Scenario scenario) {
    switch (scenario) {
        case Scenario::rust_oxidation: return "rust_oxidation";
        case Scenario::puncture: return "puncture";
        case Scenario::pristine: return "pristine";
    }
    return "pristine";
}

namespace {

constexpr int kImageSide = 24;
constexpr int kSurfaceSide = 12;
constexpr double kPunctureRate = 0.15;

}  // namespace

ScenarioModel::ScenarioModel(Scenario scenario, std::uint64_t seed, const Grid& grid)
    : scenario_(scenario), seed_(seed), grid_(grid), damage_(static_cast<std::size_t>(grid.population()), 0.0) {
    Rng rng(mix_seed(seed, 0x5ce7a210ULL + static_cast<std::uint64_t>(scenario)));
    const long n = grid.population();
    switch (scenario) {
        case Scenario::pristine: break;
        case Scenario::puncture:
            for (auto& d : damage_) d = rng.uniform() < kPunctureRate ? rng.uniform(0.5, 1.0) : 0.0;
            break;
        case Scenario::rust_oxidation: {
            // Oxidation spreads from a few hotspots and fades with distance.
            const long hotspots = std::max(1L, std::lround(static_cast<double>(n) / 24.0));
            const double radius = propagation_reach(n) / 2.0;
            for (long h = 0; h < hotspots; ++h) {
                const GridCoord centre = grid.coord_at(static_cast<long>(rng.below(static_cast<std::uint64_t>(n))));
                const double strength = rng.uniform(0.6, 1.0);
                for (long i = 0; i < n; ++i) {
                    const double d = distance(grid.coord_at(i), centre);
                    const double level = strength * std::max(0.0, 1.0 - d / radius);
                    damage_[static_cast<std::size_t>(i)] = std::max(damage_[static_cast<std::size_t>(i)], level);
                }
            }
            break;
        }
    }
}

double ScenarioModel::damage_level(GridCoord c) const { return damage_[static_cast<std::size_t>(grid_.index_of(c))]; }

Observation ScenarioModel::observe(GridCoord c) const {
    const double level = damage_level(c);
    Rng rng(mix_seed(seed_, 0x0b5e0000ULL + static_cast<std::uint64_t>(grid_.index_of(c))));

    std::vector<std::uint8_t> pixels(kImageSide * kImageSide);
    for (auto& px : pixels) {
        const bool spot = rng.uniform() < level * 0.9;
        px = static_cast<std::uint8_t>(spot ? 160 + rng.below(96) : rng.below(101));
    }

    std::vector<double> heights(kSurfaceSide * kSurfaceSide, 0.0);
    if (level > 0.0) {
        if (scenario_ == Scenario::puncture) {
            const int cx = 1 + static_cast<int>(rng.below(kSurfaceSide - 2));
            const int cy = 1 + static_cast<int>(rng.below(kSurfaceSide - 2));
            const auto at = [&](int x, int y) -> double& { return heights[static_cast<std::size_t>(y) * kSurfaceSide + x]; };
            at(cx, cy) = -25.0 * level;
            at(cx - 1, cy) = at(cx + 1, cy) = at(cx, cy - 1) = at(cx, cy + 1) = -12.5 * level;
        } else {
            for (auto& h : heights) h = 8.0 * level * rng.uniform(-1.0, 1.0);
        }
    }
    return Observation{ImageRaster(kImageSide, kImageSide, std::move(pixels)),
                       SurfaceMap(kSurfaceSide, kSurfaceSide, std::move(heights))};
}

Verdict ScenarioModel::detect(const ContainerLabel& label, const SddParams& params) const {
    const GridCoord c = label_to_coord(label);
    if (!grid_.contains(c)) throw ValidationError("container " + label.str() + " is not in the yard");
    const Observation obs = observe(c);
    return Verdict{label, sdd_score(obs.image, obs.surface, params)};
}

}  // namespace cddsat::sdd
