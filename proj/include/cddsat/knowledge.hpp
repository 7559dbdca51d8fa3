#pragma once

#include "cddsat/estimator.hpp"
#include "cddsat/grid.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace cddsat::knowledge {

// One measured container relative to the first seed in (col, row) order.
struct TopologyPoint {
    int dcol = 0;
    int drow = 0;
    Status status = Status::green;

    friend auto operator<=>(const TopologyPoint&, const TopologyPoint&) = default;
};

struct ConfigKey {
    std::string scenario;
    std::vector<TopologyPoint> topology;  // sorted
    long population_bucket = 0;
    int cols = 0;

    std::string canonical() const;
    // 16 hex digits (FNV-1a 64 of canonical()).
    std::string hash() const;

    friend auto operator<=>(const ConfigKey&, const ConfigKey&) = default;
};

// `bucket_width` 0 keys on the exact population; otherwise populations are
// grouped as floor(n / width). Throws ValidationError for empty seeds or a
// scenario tag containing tabs or newlines.
ConfigKey canonical_key(const std::string& scenario, const std::vector<Verdict>& seeds, long population, int cols,
                        long bucket_width = 0);

struct Entry {
    Profile profile;
    std::vector<Verdict> seeds;  // every measured container of the recorded session
    long population = 0;
    int cols = 0;
    Metric metric = Metric::euclidean;
    long hit_count = 0;
    long created_seq = 0;
};

// Profiles of finished sessions keyed by configuration. Backed by a flat file
// of "key-hash TAB scenario TAB topology TAB profile" lines when a path is
// given; the file is read on first use.
class KnowledgeStore {
public:
    KnowledgeStore() = default;
    explicit KnowledgeStore(std::filesystem::path file) : file_(std::move(file)) {}

    // On a hit returns the stored profile and counts the hit.
    std::optional<Profile> lookup(const ConfigKey& key);
    std::optional<Entry> entry(const ConfigKey& key) const;
    void store(const ConfigKey& key, Entry entry);
    std::size_t size() const;

    // True if re-estimating the stored seeds on the stored grid at the terminal
    // phase reproduces the stored profile.
    bool verify(const ConfigKey& key) const;

    // Writes the file (no-op without a path).
    void save() const;

private:
    void ensure_loaded() const;

    std::filesystem::path file_;
    mutable std::shared_mutex mutex_;
    mutable bool loaded_ = false;
    mutable std::map<ConfigKey, Entry> entries_;
    mutable long next_seq_ = 1;
};

}  // namespace cddsat::knowledge
