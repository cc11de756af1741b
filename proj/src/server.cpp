#include "lapinc/server.hpp"

#include "lapinc/errors.hpp"

#include "httplib.h"

#include <cstdlib>
#include <filesystem>
#include <sstream>

namespace lapinc {

namespace {

using nlohmann::json;

struct HttpError {
    int status;
    std::string code;
    std::string message;
    json details = nullptr;
};

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, const HttpError& e) {
    json body = {{"code", e.code}, {"message", e.message}};
    if (!e.details.is_null()) body["details"] = e.details;
    send_json(res, e.status, body);
}

// Runs a handler and maps library exceptions to structured errors.
template <class F>
void guarded(httplib::Response& res, F&& handler) {
    try {
        handler();
    } catch (const HttpError& e) {
        send_error(res, e);
    } catch (const StateError& e) {
        send_error(res, {409, "conflict", e.what()});
    } catch (const PreconditionError& e) {
        send_error(res, {422, "invalid_request", e.what()});
    } catch (const ParseError& e) {
        send_error(res, {422, "parse_error", e.what()});
    } catch (const ConvergenceError& e) {
        send_error(res, {500, "solver_failure", e.what(),
                         {{"iterations", e.iterations()},
                          {"residual", e.residual()},
                          {"basis_size", e.basis_size()}}});
    } catch (const std::exception& e) {
        send_error(res, {500, "internal", e.what()});
    }
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) return json::object();
    try {
        return json::parse(req.body);
    } catch (const json::parse_error& e) {
        throw HttpError{400, "bad_json", e.what()};
    }
}

std::vector<std::size_t> sizes_of(const ClusterAssignment& a) { return a.sizes(); }

json entry_json(const HistoryEntry& e) {
    return {{"K", e.K},
            {"metrics", to_json(e.metrics)},
            {"cluster_sizes", sizes_of(e.clusters)},
            {"solve_ms", e.solve_ms},
            {"cluster_ms", e.cluster_ms}};
}

json session_json(const Session& s) {
    json history = json::array();
    for (const auto& e : s.history()) history.push_back(entry_json(e));
    return {{"id", s.id()},
            {"status", to_string(s.status())},
            {"failure", s.failure()},
            {"warnings", s.warnings()},
            {"n", s.graph().node_count()},
            {"K", s.current_k()},
            {"config", to_json(s.config())},
            {"history", history}};
}

std::size_t parse_k(const std::string& text) {
    try {
        std::size_t pos = 0;
        const auto k = std::stoull(text, &pos);
        if (pos != text.size()) throw std::invalid_argument("trailing");
        return static_cast<std::size_t>(k);
    } catch (const std::exception&) {
        throw HttpError{422, "invalid_request", "K must be a positive integer"};
    }
}

}  // namespace

ServerOptions ServerOptions::from_environment() {
    ServerOptions o;
    if (const char* port = std::getenv("LAPINC_PORT"); port && *port) {
        try {
            o.port = std::stoi(port);
        } catch (const std::exception&) {
            throw PreconditionError(std::string("LAPINC_PORT is not a port number: ") + port);
        }
        if (o.port < 0 || o.port > 65535) throw PreconditionError("LAPINC_PORT out of range");
    }
    if (const char* dir = std::getenv("LAPINC_DATA_DIR"); dir && *dir) o.data_dir = dir;
    return o;
}

SessionService::SessionService(ServerOptions options) : options_(std::move(options)) {}

std::size_t SessionService::size() const {
    std::lock_guard lock(store_mutex_);
    return sessions_.size();
}

std::shared_ptr<SessionService::Slot> SessionService::find(const std::string& id) const {
    std::lock_guard lock(store_mutex_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) throw HttpError{404, "not_found", "unknown session '" + id + "'"};
    return it->second;
}

std::string SessionService::add(Session session) {
    std::lock_guard lock(store_mutex_);
    const auto id = session.id();
    if (sessions_.count(id)) throw HttpError{409, "conflict", "session '" + id + "' already exists"};
    sessions_.emplace(id, std::make_shared<Slot>(std::move(session)));
    return id;
}

Graph SessionService::graph_from_request(const json& body) const {
    const int sources = body.contains("edges") + body.contains("edge_list") +
                        body.contains("graph_file");
    if (sources != 1) {
        throw PreconditionError("give exactly one of 'edges', 'edge_list' or 'graph_file'");
    }
    if (body.contains("graph_file")) {
        if (options_.data_dir.empty()) {
            throw PreconditionError("file references need LAPINC_DATA_DIR to be set");
        }
        namespace fs = std::filesystem;
        const auto root = fs::weakly_canonical(options_.data_dir);
        const auto path = fs::weakly_canonical(root / body["graph_file"].get<std::string>());
        const auto rel = path.lexically_relative(root);
        if (rel.empty() || *rel.begin() == "..") {
            throw PreconditionError("graph_file must stay inside the data directory");
        }
        if (!fs::is_regular_file(path)) {
            throw PreconditionError("graph_file '" + rel.string() + "' not found");
        }
        return load_graph_file(path.string());
    }
    if (body.contains("edge_list")) {
        std::istringstream in(body["edge_list"].get<std::string>());
        return load_edge_list(in);
    }
    std::ostringstream text;
    text.precision(17);
    for (const auto& e : body["edges"]) {
        if (!e.is_array() || e.size() < 2 || e.size() > 3) {
            throw PreconditionError("each edge must be [u, v] or [u, v, w]");
        }
        text << e[0].get<std::int64_t>() << ' ' << e[1].get<std::int64_t>();
        if (e.size() == 3) text << ' ' << e[2].get<double>();
        text << '\n';
    }
    std::istringstream in(text.str());
    return load_edge_list(in);
}

void SessionService::mount(httplib::Server& server) {
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
        if (res.body.empty()) {
            if (res.status == 404) {
                send_error(res, {404, "not_found", "no such route"});
            } else {
                send_error(res, {res.status, "http_error", "request rejected"});
            }
        }
    });
    server.Post("/v1/sessions", [this](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] {
            if (req.body.size() > options_.max_upload_bytes) {
                throw HttpError{413, "payload_too_large",
                                "upload exceeds " + std::to_string(options_.max_upload_bytes) +
                                    " bytes; pass a graph_file reference instead"};
            }
            const json body = parse_body(req);
            if (!body.is_object()) throw PreconditionError("request body must be a JSON object");
            std::string id;
            try {
                if (body.contains("checkpoint")) {
                    id = add(Session::resume(body["checkpoint"]));
                } else {
                    const auto cfg = session_config_from_json(body.value("config", json::object()));
                    Graph g = graph_from_request(body);
                    std::string sid;
                    {
                        std::lock_guard lock(store_mutex_);
                        sid = "s" + std::to_string(next_id_++);
                    }
                    id = add(Session(std::move(g), cfg, sid));
                }
            } catch (const json::exception& e) {
                throw PreconditionError(std::string("malformed request: ") + e.what());
            }
            auto slot = find(id);
            std::shared_lock lock(slot->mutex);
            send_json(res, 201, session_json(slot->session));
        });
    });

    server.Post(R"(/v1/sessions/([^/]+)/step)",
                [this](const httplib::Request& req, httplib::Response& res) {
                    guarded(res, [&] {
                        auto slot = find(req.matches[1]);
                        std::unique_lock lock(slot->mutex);
                        send_json(res, 200, entry_json(slot->session.step()));
                    });
                });

    server.Post(R"(/v1/sessions/([^/]+)/stop)",
                [this](const httplib::Request& req, httplib::Response& res) {
                    guarded(res, [&] {
                        auto slot = find(req.matches[1]);
                        std::unique_lock lock(slot->mutex);
                        const auto report = slot->session.stop();
                        json history = json::array();
                        for (const auto& e : report.history) history.push_back(entry_json(e));
                        send_json(res, 200,
                                  {{"id", slot->session.id()},
                                   {"status", to_string(slot->session.status())},
                                   {"K", report.K},
                                   {"metrics", to_json(report.metrics)},
                                   {"cluster_sizes", sizes_of(report.clusters)},
                                   {"history", history}});
                    });
                });

    server.Get(R"(/v1/sessions/([^/]+))", [this](const httplib::Request& req,
                                                  httplib::Response& res) {
        guarded(res, [&] {
            auto slot = find(req.matches[1]);
            std::shared_lock lock(slot->mutex);
            send_json(res, 200, session_json(slot->session));
        });
    });

    server.Get(R"(/v1/sessions/([^/]+)/clusters/([^/]+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] {
                       auto slot = find(req.matches[1]);
                       const auto K = parse_k(req.matches[2]);
                       std::shared_lock lock(slot->mutex);
                       const auto& s = slot->session;
                       const HistoryEntry* entry = nullptr;
                       for (const auto& e : s.history()) {
                           if (e.K == K) entry = &e;
                       }
                       if (!entry) {
                           throw HttpError{404, "not_found",
                                           "no clustering recorded for K = " + std::to_string(K)};
                       }
                       send_json(res, 200,
                                 {{"K", K},
                                  {"nodes", s.graph().original_ids()},
                                  {"labels", entry->clusters.labels},
                                  {"cluster_sizes", sizes_of(entry->clusters)}});
                   });
               });

    server.Get(R"(/v1/sessions/([^/]+)/export)",
               [this](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] {
                       auto slot = find(req.matches[1]);
                       const auto format =
                           req.has_param("format") ? req.get_param_value("format") : "csv";
                       std::shared_lock lock(slot->mutex);
                       const auto& s = slot->session;
                       if (format == "csv") {
                           res.status = 200;
                           res.set_content(s.metrics_csv(), "text/csv");
                       } else if (format == "json") {
                           send_json(res, 200, s.metrics_json());
                       } else if (format == "labels") {
                           res.status = 200;
                           res.set_content(s.labels_csv(), "text/csv");
                       } else if (format == "checkpoint") {
                           send_json(res, 200, s.checkpoint());
                       } else {
                           throw HttpError{422, "invalid_request",
                                           "format must be csv, json, labels or checkpoint"};
                       }
                   });
               });
}

int run_server(const ServerOptions& options) {
    httplib::Server server;
    SessionService service(options);
    service.mount(server);
    if (!server.listen(options.host, options.port)) return 1;
    return 0;
}

}  // namespace lapinc
