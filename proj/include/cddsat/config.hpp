#pragma once

#include "cddsat/sat_engine.hpp"
#include "cddsat/sdd.hpp"

#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace cddsat {

// Settings shared by the service and the CLI. Loaded from "key = value" text
// ('#' comments, optional quotes around values) and CDDSAT_<KEY> environment
// variables, later sources overriding earlier ones.
struct ServiceConfig {
    std::string bind = "127.0.0.1";
    int port = 8080;
    std::filesystem::path data_dir = "cddsat-data";
    EngineConfig engine;
    std::string scenario = "rust_oxidation";
    sdd::SddParams sdd;
    long bucket_width = 0;
    double idle_timeout_seconds = 0.0;  // 0 disables reaping
    bool wall_clock = false;            // measure sorting time instead of simulating it

    // Throws ValidationError for unknown keys or bad values.
    void set(std::string_view key, std::string_view value);
    void load_text(std::string_view text);
    void load_file(const std::filesystem::path& path);
    // `getenv` is injectable for tests.
    void apply_env(const std::function<const char*(const char*)>& getenv);

    static const std::vector<std::string>& keys();
};

}  // namespace cddsat
