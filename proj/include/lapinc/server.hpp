#pragma once

#include "lapinc/session.hpp"

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

namespace httplib {
class Server;
}

namespace lapinc {

struct ServerOptions {
    /// Root for graph file references; empty disables them.
    std::string data_dir;
    /// Request bodies above this size are rejected with 413; use a file reference instead.
    std::size_t max_upload_bytes = 8u << 20;
    int port = 8080;
    std::string host = "127.0.0.1";

    /// Reads LAPINC_PORT and LAPINC_DATA_DIR on top of the defaults.
    static ServerOptions from_environment();
};

/// Session store plus the /v1 routes. Sessions are independent; each one
/// serializes step/stop and lets reads share the lock.
class SessionService {
public:
    explicit SessionService(ServerOptions options);

    void mount(httplib::Server& server);

    /// Number of live sessions.
    std::size_t size() const;

private:
    struct Slot {
        std::shared_mutex mutex;
        Session session;
        explicit Slot(Session s) : session(std::move(s)) {}
    };

    std::shared_ptr<Slot> find(const std::string& id) const;
    std::string add(Session session);
    Graph graph_from_request(const nlohmann::json& body) const;

    ServerOptions options_;
    mutable std::mutex store_mutex_;
    std::map<std::string, std::shared_ptr<Slot>> sessions_;
    std::size_t next_id_ = 1;
};

/// Blocks serving on options.host:options.port until the process is stopped.
int run_server(const ServerOptions& options);

}  // namespace lapinc
