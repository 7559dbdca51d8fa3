#include "cddsat/config.hpp"

#include "cddsat/error.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace cddsat {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T v{};
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || end != value.data() + value.size()) {
        throw ValidationError("config '" + std::string(key) + "': malformed number '" + std::string(value) + "'");
    }
    return v;
}

}  // namespace

const std::vector<std::string>& ServiceConfig::keys() {
    static const std::vector<std::string> k = {
        "bind",         "port",          "data_dir",          "schedule",         "sampler",
        "seed",         "metric",        "scan_mode",         "mean_scan_seconds", "max_phases",
        "scenario",     "threshold",     "weight_binarization", "weight_roughness", "weight_depth",
        "roughness_cap_mm", "depth_cap_mm", "bucket_width",   "idle_timeout_seconds", "clock",
    };
    return k;
}

void ServiceConfig::set(std::string_view key, std::string_view value) {
    if (key == "bind") {
        bind = value;
    } else if (key == "port") {
        port = parse_number<int>(key, value);
        if (port < 0 || port > 65535) throw ValidationError("config 'port' out of range");
    } else if (key == "data_dir") {
        data_dir = std::string(value);
    } else if (key == "schedule") {
        engine.schedule.kind = parse_schedule(value);
    } else if (key == "sampler") {
        engine.sampler = parse_sampler(value);
    } else if (key == "seed") {
        engine.seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "metric") {
        engine.metric = parse_metric(value);
    } else if (key == "scan_mode") {
        engine.scan_mode = sdd::parse_scan_mode(value);
    } else if (key == "mean_scan_seconds") {
        engine.mean_scan_seconds = parse_number<double>(key, value);
        if (!(engine.mean_scan_seconds > 0.0)) throw ValidationError("config 'mean_scan_seconds' must be positive");
    } else if (key == "max_phases") {
        engine.schedule.max_phases = parse_number<int>(key, value);
        if (engine.schedule.max_phases < 0) throw ValidationError("config 'max_phases' must be >= 0");
    } else if (key == "scenario") {
        scenario = value;
    } else if (key == "threshold") {
        sdd.threshold = parse_number<int>(key, value);
    } else if (key == "weight_binarization") {
        sdd.weight_binarization = parse_number<double>(key, value);
    } else if (key == "weight_roughness") {
        sdd.weight_roughness = parse_number<double>(key, value);
    } else if (key == "weight_depth") {
        sdd.weight_depth = parse_number<double>(key, value);
    } else if (key == "roughness_cap_mm") {
        sdd.roughness_cap_mm = parse_number<double>(key, value);
    } else if (key == "depth_cap_mm") {
        sdd.depth_cap_mm = parse_number<double>(key, value);
    } else if (key == "bucket_width") {
        bucket_width = parse_number<long>(key, value);
        if (bucket_width < 0) throw ValidationError("config 'bucket_width' must be >= 0");
    } else if (key == "idle_timeout_seconds") {
        idle_timeout_seconds = parse_number<double>(key, value);
    } else if (key == "clock") {
        if (value == "simulated") {
            wall_clock = false;
        } else if (value == "wall") {
            wall_clock = true;
        } else {
            throw ValidationError("config 'clock' must be 'simulated' or 'wall'");
        }
    } else {
        throw ValidationError("unknown config key '" + std::string(key) + "'");
    }
}

void ServiceConfig::load_text(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty() || line.front() == '[') continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ValidationError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string_view value = trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
        set(trim(line.substr(0, eq)), value);
    }
}

void ServiceConfig::load_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    load_text(ss.str());
}

void ServiceConfig::apply_env(const std::function<const char*(const char*)>& getenv) {
    for (const auto& key : keys()) {
        std::string name = "CDDSAT_" + key;
        std::transform(name.begin(), name.end(), name.begin(), [](unsigned char c) { return std::toupper(c); });
        if (const char* v = getenv(name.c_str())) set(key, v);
    }
}

}  // namespace cddsat
