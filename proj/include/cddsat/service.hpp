#pragma once

#include "cddsat/config.hpp"
#include "cddsat/knowledge.hpp"

#include <chrono>
#include <json.hpp>
#include <map>
#include <memory>
#include <shared_mutex>
#include <string>

namespace cddsat::service {

using json = nlohmann::json;

enum class DispositionKind { reject, isolate, control, accept, else_note };

// The manager's final action on the sorted cargo.
struct Disposition {
    DispositionKind kind = DispositionKind::accept;
    std::string note;  // required for else_note

    // {"disposition": "isolate"} or {"disposition": "else", "note": "..."}.
    static Disposition from_json(const json& body);
    json to_json() const;
};

// Inspection sessions behind the HTTP routes. Every method takes and returns
// JSON payloads and throws the library's error types; the HTTP layer maps them
// to status codes. Sessions are independent; calls on one session are
// serialized by a per-session mutex.
class SessionManager {
public:
    explicit SessionManager(ServiceConfig config);
    ~SessionManager();

    json create_session(const json& body);
    json get_suggestions(const std::string& id);
    json submit_verdicts(const std::string& id, const json& body);
    json advance(const std::string& id);
    json get_profile(const std::string& id);
    json post_decision(const std::string& id, const json& body);
    std::string get_db(const std::string& id);
    std::string timing_csv(const std::string& id);

    // Rebuilds read-only sessions from terminated DB files in the data
    // directory. Returns how many were loaded.
    std::size_t recover();

    // Drops unfinished sessions idle for longer than the configured timeout.
    std::size_t reap_idle(std::chrono::steady_clock::time_point now = std::chrono::steady_clock::now());

    std::size_t session_count() const;
    const ServiceConfig& config() const { return config_; }
    knowledge::KnowledgeStore& knowledge() { return knowledge_; }

private:
    struct Session;

    std::shared_ptr<Session> find(const std::string& id);
    std::string new_id();

    ServiceConfig config_;
    knowledge::KnowledgeStore knowledge_;
    mutable std::shared_mutex sessions_mutex_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    unsigned long long id_counter_ = 0;
};

// Thin cpp-httplib front end over a SessionManager.
class HttpServer {
public:
    explicit HttpServer(SessionManager& manager);
    ~HttpServer();

    // Binds and returns the port (an ephemeral one when `port` is 0).
    int bind(const std::string& host, int port);
    // Blocks until stop().
    void listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace cddsat::service
