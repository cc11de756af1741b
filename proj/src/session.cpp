#include "lapinc/session.hpp"

#include "lapinc/errors.hpp"

#include <chrono>
#include <sstream>

namespace lapinc {

std::string to_string(MetricGraph m) { return m == MetricGraph::Normalized ? "wn" : "w"; }

MetricGraph metric_graph_from_string(const std::string& name) {
    if (name == "w") return MetricGraph::Original;
    if (name == "wn") return MetricGraph::Normalized;
    throw PreconditionError("metric graph must be 'w' or 'wn', got '" + name + "'");
}

std::string to_string(SessionStatus s) {
    switch (s) {
        case SessionStatus::Running: return "running";
        case SessionStatus::Stopped: return "stopped";
        case SessionStatus::Failed: return "failed";
    }
    return "unknown";
}

void SessionConfig::validate() const {
    solver.validate();
    if (k_max && *k_max < 2) throw PreconditionError("k_max must be at least 2");
    if (kmeans.restarts == 0 || kmeans.max_iter == 0) {
        throw PreconditionError("k-means restarts and max_iter must be positive");
    }
}

nlohmann::json to_json(const SessionConfig& cfg) {
    nlohmann::json j;
    j["kind"] = to_string(cfg.kind);
    j["solver"] = {{"method", to_string(cfg.solver.solver)},
                   {"tol", cfg.solver.tol},
                   {"max_iters", cfg.solver.max_iters},
                   {"seed", cfg.solver.seed},
                   {"reorthogonalize_every", cfg.solver.reorthogonalize_every},
                   {"lanczos_max_basis", cfg.solver.lanczos_max_basis}};
    j["metrics_on"] = to_string(cfg.metrics_on);
    j["kmeans"] = {{"seed", cfg.kmeans.seed},
                   {"restarts", cfg.kmeans.restarts},
                   {"max_iter", cfg.kmeans.max_iter},
                   {"normalize_rows", cfg.kmeans.normalize_rows}};
    j["k_max"] = cfg.k_max ? nlohmann::json(*cfg.k_max) : nlohmann::json(nullptr);
    return j;
}

SessionConfig session_config_from_json(const nlohmann::json& j) {
    SessionConfig cfg;
    if (j.is_null()) return cfg;
    if (!j.is_object()) throw PreconditionError("config must be a JSON object");
    try {
        if (j.contains("kind")) cfg.kind = laplacian_kind_from_string(j["kind"].get<std::string>());
        if (j.contains("metrics_on")) {
            cfg.metrics_on = metric_graph_from_string(j["metrics_on"].get<std::string>());
        }
        if (j.contains("solver")) {
            const auto& s = j["solver"];
            if (s.contains("method")) {
                cfg.solver.solver = leading_solver_from_string(s["method"].get<std::string>());
            }
            if (s.contains("tol")) cfg.solver.tol = s["tol"].get<double>();
            if (s.contains("max_iters")) cfg.solver.max_iters = s["max_iters"].get<std::size_t>();
            if (s.contains("seed")) cfg.solver.seed = s["seed"].get<std::uint64_t>();
            if (s.contains("reorthogonalize_every")) {
                cfg.solver.reorthogonalize_every = s["reorthogonalize_every"].get<std::size_t>();
            }
            if (s.contains("lanczos_max_basis")) {
                cfg.solver.lanczos_max_basis = s["lanczos_max_basis"].get<std::size_t>();
            }
        }
        if (j.contains("kmeans")) {
            const auto& k = j["kmeans"];
            if (k.contains("seed")) cfg.kmeans.seed = k["seed"].get<std::uint64_t>();
            if (k.contains("restarts")) cfg.kmeans.restarts = k["restarts"].get<std::size_t>();
            if (k.contains("max_iter")) cfg.kmeans.max_iter = k["max_iter"].get<std::size_t>();
            if (k.contains("normalize_rows")) {
                cfg.kmeans.normalize_rows = k["normalize_rows"].get<bool>();
            }
        }
        if (j.contains("k_max") && !j["k_max"].is_null()) {
            cfg.k_max = j["k_max"].get<std::size_t>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw PreconditionError(std::string("invalid session config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------

Session::Session(Graph graph, SessionConfig config, std::string id)
    : id_(std::move(id)), config_(std::move(config)), graph_(std::move(graph)) {
    config_.validate();
    if (graph_.node_count() < 2) throw PreconditionError("session needs at least two nodes");
    build_operators();
    basis_ = kernel_basis(laplacian_, components_);
    if (components_.count > 1) {
        warnings_.push_back("graph has " + std::to_string(components_.count) +
                            " connected components; the kernel basis holds one indicator each");
    }
}

void Session::build_operators() {
    normalized_ = normalize_weights(graph_);
    laplacian_ = build_laplacian(normalized_, config_.kind);
    components_ = connected_components(normalized_);
}

const HistoryEntry& Session::step() {
    if (status_ == SessionStatus::Stopped) throw StateError("session is stopped");
    if (status_ == SessionStatus::Failed) throw StateError("session failed: " + failure_);
    const std::size_t K = history_.empty() ? 2 : history_.back().K + 1;
    if (K > graph_.node_count()) {
        throw StateError("spectrum exhausted: K = " + std::to_string(K) + " exceeds n = " +
                         std::to_string(graph_.node_count()));
    }
    if (config_.k_max && K > *config_.k_max) {
        throw StateError("K = " + std::to_string(K) + " exceeds the configured k_max");
    }

    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    try {
        while (basis_.size() < K) extend(laplacian_, basis_, config_.solver);
    } catch (const ConvergenceError& e) {
        status_ = SessionStatus::Failed;
        failure_ = e.what();
        throw;
    }
    const auto t1 = clock::now();

    HistoryEntry entry;
    entry.K = K;
    entry.clusters = kmeans(basis_.vectors.leftCols(static_cast<Eigen::Index>(K)), K,
                            config_.kmeans);
    const Graph& metric_graph =
        config_.metrics_on == MetricGraph::Original ? graph_ : normalized_;
    entry.metrics = metrics_bundle(metric_graph, basis_, laplacian_, entry.clusters);
    const auto t2 = clock::now();
    entry.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    entry.cluster_ms = std::chrono::duration<double, std::milli>(t2 - t1).count();
    history_.push_back(std::move(entry));
    return history_.back();
}

SessionReport Session::stop() {
    if (status_ != SessionStatus::Running) {
        throw StateError("session is " + to_string(status_) + "; only a running session can stop");
    }
    if (history_.empty()) throw StateError("no clustering yet: step at least once before stopping");
    status_ = SessionStatus::Stopped;
    const auto& last = history_.back();
    return {last.K, last.clusters, last.metrics, history_};
}

const HistoryEntry& Session::entry(std::size_t K) const {
    for (const auto& e : history_) {
        if (e.K == K) return e;
    }
    throw PreconditionError("no clustering recorded for K = " + std::to_string(K));
}

std::string Session::labels_csv(std::size_t K) const {
    if (history_.empty()) throw StateError("nothing to export: history is empty");
    const auto& e = K == 0 ? history_.back() : entry(K);
    std::ostringstream out;
    out << "node,cluster\n";
    const auto& ids = graph_.original_ids();
    for (std::size_t i = 0; i < e.clusters.labels.size(); ++i) {
        out << ids[i] << ',' << e.clusters.labels[i] << '\n';
    }
    return out.str();
}

std::string Session::metrics_csv() const {
    if (history_.empty()) throw StateError("nothing to export: history is empty");
    std::string out = metrics_csv_header() + "\n";
    for (const auto& e : history_) out += to_csv_row(e.metrics) + "\n";
    return out;
}

nlohmann::json Session::metrics_json() const {
    if (history_.empty()) throw StateError("nothing to export: history is empty");
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : history_) arr.push_back(to_json(e.metrics));
    return arr;
}

// ---------------------------------------------------------------------------

nlohmann::json graph_to_json(const Graph& g) {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : g.edges()) edges.push_back({e.u, e.v, e.w});
    return {{"n", g.node_count()}, {"ids", g.original_ids()}, {"edges", edges}};
}

Graph graph_from_json(const nlohmann::json& j) {
    try {
        const auto n = j.at("n").get<std::size_t>();
        auto ids = j.at("ids").get<std::vector<std::int64_t>>();
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            edges.push_back({e.at(0).get<std::size_t>(), e.at(1).get<std::size_t>(),
                             e.at(2).get<double>()});
        }
        return Graph::from_edges(n, edges, std::move(ids));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed graph document: ") + e.what());
    }
}

nlohmann::json to_json(const HistoryEntry& e) {
    return {{"K", e.K},
            {"labels", e.clusters.labels},
            {"inertia", e.clusters.inertia},
            {"metrics", to_json(e.metrics)},
            {"solve_ms", e.solve_ms},
            {"cluster_ms", e.cluster_ms}};
}

HistoryEntry history_entry_from_json(const nlohmann::json& j) {
    try {
        HistoryEntry e;
        e.K = j.at("K").get<std::size_t>();
        e.clusters.K = e.K;
        e.clusters.labels = j.at("labels").get<std::vector<std::size_t>>();
        e.clusters.inertia = j.at("inertia").get<double>();
        e.metrics = metrics_from_json(j.at("metrics"));
        e.solve_ms = j.at("solve_ms").get<double>();
        e.cluster_ms = j.at("cluster_ms").get<double>();
        return e;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError(std::string("malformed history entry: ") + ex.what());
    }
}

nlohmann::json Session::checkpoint() const {
    nlohmann::json history = nlohmann::json::array();
    for (const auto& e : history_) history.push_back(to_json(e));
    return {{"format", "lapinc.session"},
            {"version", 1},
            {"id", id_},
            {"status", to_string(status_)},
            {"failure", failure_},
            {"warnings", warnings_},
            {"config", to_json(config_)},
            {"graph", graph_to_json(graph_)},
            {"basis", to_json(basis_)},
            {"history", history}};
}

Session Session::resume(const nlohmann::json& cp) {
    try {
        if (cp.at("format").get<std::string>() != "lapinc.session") {
            throw ParseError("not a session checkpoint");
        }
        Session s;
        s.id_ = cp.at("id").get<std::string>();
        s.config_ = session_config_from_json(cp.at("config"));
        s.graph_ = graph_from_json(cp.at("graph"));
        s.build_operators();
        s.basis_ = basis_from_json(cp.at("basis"));
        if (s.basis_.dimension() != s.graph_.node_count()) {
            throw ParseError("checkpoint basis does not match its graph");
        }
        for (const auto& e : cp.at("history")) s.history_.push_back(history_entry_from_json(e));
        const auto status = cp.at("status").get<std::string>();
        s.status_ = status == "stopped"  ? SessionStatus::Stopped
                    : status == "failed" ? SessionStatus::Failed
                                         : SessionStatus::Running;
        s.failure_ = cp.at("failure").get<std::string>();
        s.warnings_ = cp.at("warnings").get<std::vector<std::string>>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed session checkpoint: ") + e.what());
    }
}

}  // namespace lapinc
