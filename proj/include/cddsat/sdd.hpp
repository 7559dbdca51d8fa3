#pragma once

#include "cddsat/estimator.hpp"
#include "cddsat/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace cddsat::sdd {

// Grayscale image, row-major, intensities 0..255.
class ImageRaster {
public:
    ImageRaster(int width, int height, std::vector<std::uint8_t> pixels);
    static ImageRaster filled(int width, int height, std::uint8_t value);

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<std::uint8_t>& pixels() const { return pixels_; }
    std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

private:
    int width_;
    int height_;
    std::vector<std::uint8_t> pixels_;
};

// Surface elevations in millimetres, row-major.
class SurfaceMap {
public:
    SurfaceMap(int width, int height, std::vector<double> heights);
    static SurfaceMap flat(int width, int height, double level = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    const std::vector<double>& heights() const { return heights_; }

private:
    int width_;
    int height_;
    std::vector<double> heights_;
};

struct BinarizedImage {
    std::vector<bool> mask;  // set where intensity >= threshold
    double damage_fraction = 0.0;
};

BinarizedImage binarize(const ImageRaster& image, int threshold);

// RMS deviation of the heights from their mean.
double roughness(const SurfaceMap& surface);

// Peak-to-valley height difference.
double max_depth(const SurfaceMap& surface);

struct SddParams {
    int threshold = 128;
    double weight_binarization = 0.5;
    double weight_roughness = 0.25;
    double weight_depth = 0.25;
    double roughness_cap_mm = 5.0;
    double depth_cap_mm = 20.0;

    // Throws ValidationError for negative weights, weights not summing to 1,
    // non-positive caps, or a threshold outside 0..255.
    void validate() const;
};

PScore sdd_score(const ImageRaster& image, const SurfaceMap& surface, const SddParams& params = {});

enum class ScanMode { sequential, concurrent };

ScanMode parse_scan_mode(std::string_view name);
std::string_view to_string(ScanMode mode);

struct ScanPlan {
    std::vector<ContainerLabel> targets;
    ScanMode mode = ScanMode::sequential;
    std::vector<double> per_scan_seconds;

    // Throws ValidationError unless there is one positive duration per target.
    void validate() const;
};

// Sequential scans add up; concurrent scans run in consecutive groups of three
// (one detector per side), each group taking as long as its slowest scan.
double scan_time(const ScanPlan& plan);
double scan_time(const std::vector<double>& durations, ScanMode mode);

// PGM "P2" (plain) grayscale. maxval other than 255 is rescaled to 0..255.
ImageRaster read_pgm(std::string_view text);
ImageRaster load_pgm(const std::filesystem::path& path);
std::string write_pgm(const ImageRaster& image);

// Plain grid text: "width height" then `height` lines of `width` decimals.
std::string write_surface(const SurfaceMap& surface);
SurfaceMap read_surface(std::string_view text);
SurfaceMap load_surface(const std::filesystem::path& path);

enum class Scenario { rust_oxidation, puncture, pristine };

Scenario parse_scenario(std::string_view name);
std::string_view to_string(Scenario scenario);

struct Observation {
    ImageRaster image;
    SurfaceMap surface;
};

// Seeded synthetic yard: every container has a hidden damage level, and
// observing it renders an image and a surface consistent with that level.
class ScenarioModel {
public:
    ScenarioModel(Scenario scenario, std::uint64_t seed, const Grid& grid);

    Scenario scenario() const { return scenario_; }
    double damage_level(GridCoord c) const;
    Observation observe(GridCoord c) const;
    Verdict detect(const ContainerLabel& label, const SddParams& params = {}) const;

private:
    Scenario scenario_;
    std::uint64_t seed_;
    Grid grid_;
    std::vector<double> damage_;
};

}  // namespace cddsat::sdd
