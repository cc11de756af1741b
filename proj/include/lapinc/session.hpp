#pragma once

#include "lapinc/clustering.hpp"
#include "lapinc/eigensolve.hpp"
#include "lapinc/graph.hpp"

#include "json.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace lapinc {

enum class MetricGraph {
    Original,    // W
    Normalized,  // W_N, the matrix that is decomposed
};

std::string to_string(MetricGraph m);
MetricGraph metric_graph_from_string(const std::string& name);

struct SessionConfig {
    LaplacianKind kind = LaplacianKind::Unnormalized;
    SolverConfig solver;
    MetricGraph metrics_on = MetricGraph::Original;
    KMeansOptions kmeans;
    /// Optional safety cap on K; unset means no upper bound.
    std::optional<std::size_t> k_max;

    void validate() const;
};

nlohmann::json to_json(const SessionConfig& cfg);
/// Missing keys keep their defaults. Throws PreconditionError on invalid values.
SessionConfig session_config_from_json(const nlohmann::json& j);

enum class SessionStatus { Running, Stopped, Failed };

std::string to_string(SessionStatus s);

struct HistoryEntry {
    std::size_t K = 0;
    ClusterAssignment clusters;
    MetricsRecord metrics;
    double solve_ms = 0.0;
    double cluster_ms = 0.0;
};

struct SessionReport {
    std::size_t K = 0;
    ClusterAssignment clusters;
    MetricsRecord metrics;
    std::vector<HistoryEntry> history;
};

/// The user-guided incremental clustering loop: weights are normalized to
/// W_N = S^-1/2 W S^-1/2, the Laplacian of W_N is decomposed one eigenpair at a
/// time, and every step clusters the rows of V_K and records the metrics.
///
/// Not internally synchronized; the HTTP layer serializes mutations.
class Session {
public:
    Session(Graph graph, SessionConfig config, std::string id = "session");

    const std::string& id() const noexcept { return id_; }
    SessionStatus status() const noexcept { return status_; }
    const std::string& failure() const noexcept { return failure_; }
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }
    const SessionConfig& config() const noexcept { return config_; }

    const Graph& graph() const noexcept { return graph_; }
    const Graph& normalized_graph() const noexcept { return normalized_; }
    const LaplacianMatrix& laplacian() const noexcept { return laplacian_; }
    const EigenBasis& basis() const noexcept { return basis_; }
    const std::vector<HistoryEntry>& history() const noexcept { return history_; }

    /// Largest K clustered so far (0 before the first step).
    std::size_t current_k() const noexcept { return history_.empty() ? 0 : history_.back().K; }

    /// Advances K by one (starting at 2), clusters and scores. Throws StateError when
    /// not running or the spectrum is exhausted; solver failures mark the session
    /// Failed and rethrow.
    const HistoryEntry& step();

    SessionReport stop();

    /// Two-column CSV "node,cluster" with original ids; latest K when `K` is 0.
    std::string labels_csv(std::size_t K = 0) const;
    std::string metrics_csv() const;
    nlohmann::json metrics_json() const;

    /// Whole-session checkpoint: graph, config, basis, history, status.
    nlohmann::json checkpoint() const;
    static Session resume(const nlohmann::json& checkpoint);

    const HistoryEntry& entry(std::size_t K) const;

private:
    Session() = default;
    void build_operators();

    std::string id_;
    SessionConfig config_;
    Graph graph_;
    Graph normalized_;
    LaplacianMatrix laplacian_;
    ComponentLabeling components_;
    EigenBasis basis_;
    std::vector<HistoryEntry> history_;
    SessionStatus status_ = SessionStatus::Running;
    std::string failure_;
    std::vector<std::string> warnings_;
};

nlohmann::json to_json(const HistoryEntry& e);
HistoryEntry history_entry_from_json(const nlohmann::json& j);

nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

}  // namespace lapinc
