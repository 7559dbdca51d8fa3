#include "cddsat/knowledge.hpp"

#include "cddsat/csv.hpp"
#include "cddsat/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <sstream>

namespace cddsat::knowledge {

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

template <typename T>
T number(std::string_view s) {
    T v{};
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || end != s.data() + s.size()) {
        throw ValidationError("knowledge store: malformed number '" + std::string(s) + "'");
    }
    return v;
}

// "name=value" -> value, checking the name.
std::string_view field(std::string_view item, std::string_view name) {
    if (item.substr(0, name.size()) != name || item.size() <= name.size() || item[name.size()] != '=') {
        throw ValidationError("knowledge store: expected field '" + std::string(name) + "'");
    }
    return item.substr(name.size() + 1);
}

std::string topology_text(const ConfigKey& key) {
    std::string out = "bucket=" + std::to_string(key.population_bucket) + ";cols=" + std::to_string(key.cols) + ";points=";
    for (std::size_t i = 0; i < key.topology.size(); ++i) {
        const auto& p = key.topology[i];
        if (i) out += ',';
        out += std::to_string(p.dcol) + ":" + std::to_string(p.drow) + ":" + std::string(to_string(p.status));
    }
    return out;
}

std::string profile_text(const Entry& e) {
    std::string out = "population=" + std::to_string(e.population) + ",cols=" + std::to_string(e.cols) +
                      ",metric=" + std::string(to_string(e.metric)) + ",hits=" + std::to_string(e.hit_count) +
                      ",seq=" + std::to_string(e.created_seq);
    for (const auto& s : e.profile.scores) {
        out += "," + s.label.str() + "=" + csv::number(s.p.value());
        if (s.seed) out += '*';
    }
    return out;
}

}  // namespace

std::string ConfigKey::canonical() const {
    std::string out = scenario + "|" + std::to_string(population_bucket) + "|" + std::to_string(cols) + "|";
    for (const auto& p : topology) {
        out += std::to_string(p.dcol) + ":" + std::to_string(p.drow) + ":" + std::string(to_string(p.status)) + ";";
    }
    return out;
}

std::string ConfigKey::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ConfigKey canonical_key(const std::string& scenario, const std::vector<Verdict>& seeds, long population, int cols,
                        long bucket_width) {
    if (seeds.empty()) throw ValidationError("a configuration key needs at least one seed");
    if (scenario.find_first_of("\t\r\n|") != std::string::npos) {
        throw ValidationError("scenario tag must not contain tabs, newlines or '|'");
    }
    if (bucket_width < 0) throw ValidationError("bucket width must be >= 0");
    std::vector<std::pair<GridCoord, Status>> points;
    for (const auto& v : seeds) points.emplace_back(label_to_coord(v.label), v.status());
    const GridCoord origin =
        std::min_element(points.begin(), points.end(), [](const auto& a, const auto& b) { return a.first < b.first; })
            ->first;
    ConfigKey key;
    key.scenario = scenario;
    for (const auto& [c, s] : points) key.topology.push_back({c.col - origin.col, c.row - origin.row, s});
    std::sort(key.topology.begin(), key.topology.end());
    key.population_bucket = bucket_width > 0 ? population / bucket_width : population;
    key.cols = cols;
    return key;
}

void KnowledgeStore::ensure_loaded() const {
    {
        std::shared_lock lock(mutex_);
        if (loaded_) return;
    }
    std::unique_lock lock(mutex_);
    if (loaded_) return;
    loaded_ = true;
    if (file_.empty() || !std::filesystem::exists(file_)) return;
    std::ifstream in(file_);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto cols = split(line, '\t');
        if (cols.size() != 4) throw ValidationError("knowledge store: expected 4 tab-separated fields");
        ConfigKey key;
        key.scenario = std::string(cols[1]);
        const auto topo = split(cols[2], ';');
        if (topo.size() != 3) throw ValidationError("knowledge store: malformed topology");
        key.population_bucket = number<long>(field(topo[0], "bucket"));
        key.cols = number<int>(field(topo[1], "cols"));
        const std::string_view points = field(topo[2], "points");
        if (!points.empty()) {
            for (auto p : split(points, ',')) {
                const auto parts = split(p, ':');
                if (parts.size() != 3) throw ValidationError("knowledge store: malformed topology point");
                key.topology.push_back({number<int>(parts[0]), number<int>(parts[1]), parse_status(parts[2])});
            }
        }
        if (key.hash() != cols[0]) throw ValidationError("knowledge store: key hash mismatch");

        const auto items = split(cols[3], ',');
        if (items.size() < 5) throw ValidationError("knowledge store: malformed profile");
        Entry e;
        e.population = number<long>(field(items[0], "population"));
        e.cols = number<int>(field(items[1], "cols"));
        e.metric = parse_metric(field(items[2], "metric"));
        e.hit_count = number<long>(field(items[3], "hits"));
        e.created_seq = number<long>(field(items[4], "seq"));
        const Grid grid = Grid::build(e.population, e.cols);
        std::vector<LabelScore> scores;
        for (std::size_t i = 5; i < items.size(); ++i) {
            std::string_view item = items[i];
            const bool seed = !item.empty() && item.back() == '*';
            if (seed) item.remove_suffix(1);
            const std::size_t eq = item.find('=');
            if (eq == std::string_view::npos) throw ValidationError("knowledge store: malformed score");
            LabelScore s{ContainerLabel::parse(item.substr(0, eq)), PScore(number<double>(item.substr(eq + 1))), seed};
            if (seed) e.seeds.push_back({s.label, s.p});
            scores.push_back(std::move(s));
        }
        e.profile = profile_from_scores(std::move(scores), grid);
        next_seq_ = std::max(next_seq_, e.created_seq + 1);
        entries_[key] = std::move(e);
    }
}

std::optional<Profile> KnowledgeStore::lookup(const ConfigKey& key) {
    ensure_loaded();
    std::unique_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    ++it->second.hit_count;
    return it->second.profile;
}

std::optional<Entry> KnowledgeStore::entry(const ConfigKey& key) const {
    ensure_loaded();
    std::shared_lock lock(mutex_);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void KnowledgeStore::store(const ConfigKey& key, Entry entry) {
    ensure_loaded();
    std::unique_lock lock(mutex_);
    entry.created_seq = next_seq_++;
    entries_[key] = std::move(entry);
}

std::size_t KnowledgeStore::size() const {
    ensure_loaded();
    std::shared_lock lock(mutex_);
    return entries_.size();
}

bool KnowledgeStore::verify(const ConfigKey& key) const {
    const auto e = entry(key);
    if (!e || e->seeds.empty()) return false;
    EstimateOptions opts;
    opts.terminal = true;
    opts.metric = e->metric;
    return estimate(e->seeds, Grid::build(e->population, e->cols), opts) == e->profile;
}

void KnowledgeStore::save() const {
    if (file_.empty()) return;
    ensure_loaded();
    std::ostringstream out;
    {
        std::shared_lock lock(mutex_);
        for (const auto& [key, e] : entries_) {
            out << key.hash() << '\t' << key.scenario << '\t' << topology_text(key) << '\t' << profile_text(e) << '\n';
        }
    }
    if (file_.has_parent_path()) std::filesystem::create_directories(file_.parent_path());
    const auto tmp = std::filesystem::path(file_.string() + ".tmp");
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw ValidationError("cannot write " + tmp.string());
        f << out.str();
    }
    std::filesystem::rename(tmp, file_);
}

}  // namespace cddsat::knowledge
