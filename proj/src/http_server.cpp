#include "cddsat/error.hpp"
#include "cddsat/service.hpp"

#include <httplib.h>

namespace cddsat::service {

namespace {

json error_body(const std::string& code, const std::string& message, const std::vector<std::string>& details = {}) {
    return json{{"code", code}, {"message", message}, {"details", details}};
}

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    return json::parse(req.body);
}

// Runs a handler and maps library errors to status codes.
template <typename F>
void guarded(httplib::Response& res, F&& fn) {
    try {
        fn();
    } catch (const json::exception& e) {
        send_json(res, 400, error_body("bad_request", e.what()));
    } catch (const ValidationError& e) {
        send_json(res, 422, error_body("validation_error", e.what(), e.details()));
    } catch (const LabelError& e) {
        send_json(res, 422, error_body("validation_error", e.what(), {e.text()}));
    } catch (const NotFoundError& e) {
        send_json(res, 404, error_body("not_found", e.what()));
    } catch (const ConflictError& e) {
        send_json(res, 409, error_body("conflict", e.what()));
    } catch (const ParseError& e) {
        send_json(res, 422, error_body("parse_error", e.what(), {e.expected()}));
    } catch (const Error& e) {
        send_json(res, 400, error_body("bad_request", e.what()));
    } catch (const std::exception& e) {
        send_json(res, 500, error_body("internal", e.what()));
    }
}

}  // namespace

struct HttpServer::Impl {
    SessionManager& manager;
    httplib::Server server;

    explicit Impl(SessionManager& m) : manager(m) {}
};

HttpServer::HttpServer(SessionManager& manager) : impl_(std::make_unique<Impl>(manager)) {
    auto& srv = impl_->server;
    SessionManager& m = manager;

    srv.Post("/sessions", [&m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 201, m.create_session(parse_body(req))); });
    });
    srv.Get(R"(/sessions/([A-Za-z0-9_-]+)/suggestions)", [&m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, m.get_suggestions(req.matches[1])); });
    });
    srv.Post(R"(/sessions/([A-Za-z0-9_-]+)/verdicts)", [&m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, m.submit_verdicts(req.matches[1], parse_body(req))); });
    });
    srv.Post(R"(/sessions/([A-Za-z0-9_-]+)/advance)", [&m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, m.advance(req.matches[1])); });
    });
    srv.Get(R"(/sessions/([A-Za-z0-9_-]+)/profile)", [&m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, m.get_profile(req.matches[1])); });
    });
    srv.Post(R"(/sessions/([A-Za-z0-9_-]+)/decision)", [&m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, m.post_decision(req.matches[1], parse_body(req))); });
    });
    srv.Get(R"(/sessions/([A-Za-z0-9_-]+)/db)", [&m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            res.status = 200;
            res.set_content(m.get_db(req.matches[1]), "text/plain");
        });
    });
    srv.Get(R"(/sessions/([A-Za-z0-9_-]+)/timing\.csv)", [&m](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            res.status = 200;
            res.set_content(m.timing_csv(req.matches[1]), "text/csv");
        });
    });
    srv.set_error_handler([](const httplib::Request& req, httplib::Response& res) {
        if (!res.body.empty()) return;
        if (res.status == 404) {
            send_json(res, 404, error_body("not_found", "no route for " + req.method + " " + req.path));
        } else if (res.status == 405) {
            send_json(res, 405, error_body("method_not_allowed", req.method + " " + req.path));
        }
    });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    auto& srv = impl_->server;
    const int bound = port == 0 ? srv.bind_to_any_port(host) : (srv.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void HttpServer::listen() { impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace cddsat::service
