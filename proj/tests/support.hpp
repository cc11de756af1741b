#pragma once

#include "lapinc/graph.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <vector>

namespace lapinc::testing {

inline Graph make_graph(std::size_t n, std::vector<Edge> edges) {
    return Graph::from_edges(n, edges);
}

inline Graph path3() { return make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}}); }
inline Graph triangle() { return make_graph(3, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}}); }
inline Graph two_edges() { return make_graph(4, {{0, 1, 1.0}, {2, 3, 1.0}}); }
inline Graph single_edge(double w = 1.0) { return make_graph(2, {{0, 1, w}}); }
inline Graph two_triangles() {
    return make_graph(6, {{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0},
                          {3, 4, 1.0}, {4, 5, 1.0}, {3, 5, 1.0}});
}

/// Connected graph with weights in U(0.5, 2): a random spanning tree plus
/// Bernoulli extra edges for an average degree near `degree`.
inline Graph random_connected(std::size_t n, std::uint64_t seed, double degree = 6.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Edge> edges;
    for (std::size_t i = 1; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> parent(0, i - 1);
        edges.push_back({parent(rng), i, weight(rng)});
    }
    const double p = n > 1 ? std::max(0.0, degree - 2.0) / static_cast<double>(n - 1) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (unit(rng) < p) edges.push_back({i, j, weight(rng)});
        }
    }
    return Graph::from_edges(n, edges);
}

/// Two random connected blocks joined by a few light edges.
inline Graph two_blocks(std::size_t half, std::uint64_t seed) {
    const Graph a = random_connected(half, seed);
    const Graph b = random_connected(half, seed + 1);
    std::vector<Edge> edges = a.edges();
    for (auto e : b.edges()) edges.push_back({e.u + half, e.v + half, e.w});
    edges.push_back({0, half, 0.05});
    edges.push_back({1, half + 1, 0.05});
    return Graph::from_edges(2 * half, edges);
}

inline Eigen::MatrixXd dense_weights(const Graph& g) {
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.node_count()),
                                              static_cast<Eigen::Index>(g.node_count()));
    for (const auto& e : g.edges()) {
        W(static_cast<Eigen::Index>(e.u), static_cast<Eigen::Index>(e.v)) = e.w;
        W(static_cast<Eigen::Index>(e.v), static_cast<Eigen::Index>(e.u)) = e.w;
    }
    return W;
}

}  // namespace lapinc::testing
