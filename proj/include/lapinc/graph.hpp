#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace lapinc {

struct Edge {
    std::size_t u = 0;
    std::size_t v = 0;
    double w = 1.0;
};

/// Undirected, weighted, simple graph in compressed-row form. Both orientations of
/// every edge are stored; rows are sorted by column. Immutable once built.
class Graph {
public:
    Graph() = default;

    /// Builds a graph over nodes 0..n-1. Duplicate pairs are summed, zero-weight
    /// pairs are dropped. Self-loops, out-of-range endpoints and negative or
    /// non-finite weights throw PreconditionError.
    ///
    /// `original_ids` maps internal node index to the caller's id (defaults to
    /// the identity) and is carried through for export.
    static Graph from_edges(std::size_t n, std::span<const Edge> edges,
                            std::vector<std::int64_t> original_ids = {});

    std::size_t node_count() const noexcept { return n_; }
    std::size_t edge_count() const noexcept { return m_; }

    std::span<const std::size_t> neighbors(std::size_t i) const {
        return {cols_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }
    std::span<const double> weights(std::size_t i) const {
        return {vals_.data() + row_ptr_[i], row_ptr_[i + 1] - row_ptr_[i]};
    }

    /// W_ij, zero when no edge exists.
    double weight(std::size_t i, std::size_t j) const;

    const std::vector<std::int64_t>& original_ids() const noexcept { return ids_; }

    /// Edges with i < j in ascending (i, j) order.
    std::vector<Edge> edges() const;

    /// Same node set and ids, every weight multiplied by `factor` (> 0).
    Graph scaled(double factor) const;

private:
    std::size_t n_ = 0;
    std::size_t m_ = 0;
    std::vector<std::size_t> row_ptr_{0};
    std::vector<std::size_t> cols_;
    std::vector<double> vals_;
    std::vector<std::int64_t> ids_;
};

struct EdgeListOptions {
    double default_weight = 1.0;
};

/// Whitespace separated "u v" or "u v w" lines, '#' comments. Node ids are
/// relabeled to 0..n-1 in ascending id order.
Graph load_edge_list(std::istream& in, const EdgeListOptions& options = {});

/// MatrixMarket coordinate file (real, integer or pattern; symmetric or general).
Graph load_matrix_market(std::istream& in);

/// Loads by extension: ".mtx" is MatrixMarket, anything else an edge list.
Graph load_graph_file(const std::string& path);

/// Writes the edge list with original ids, ascending (i, j), i < j.
void write_edge_list(std::ostream& out, const Graph& g);

struct GeneratedGraph {
    Graph graph;
    int attempts = 1;
    /// True when every sample was disconnected and the largest component of the
    /// last one was returned.
    bool largest_component_fallback = false;
};

/// G(n, p) with unit weights, resampled until connected (at most 100 draws).
GeneratedGraph generate_erdos_renyi(std::size_t n, double p, std::uint64_t seed);

struct StrengthVector {
    std::vector<double> node;
    double total = 0.0;
};

StrengthVector strengths(const Graph& g);

enum class LaplacianKind { Unnormalized, Normalized };

std::string to_string(LaplacianKind kind);
LaplacianKind laplacian_kind_from_string(const std::string& name);

/// Square sparse matrix in compressed-row form.
struct CsrMatrix {
    std::size_t n = 0;
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::size_t> cols;
    std::vector<double> vals;

    std::size_t nnz() const noexcept { return vals.size(); }
    void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    Eigen::MatrixXd to_dense() const;
    double diagonal(std::size_t i) const;
};

struct LaplacianMatrix {
    LaplacianKind kind = LaplacianKind::Unnormalized;
    CsrMatrix matrix;
    StrengthVector strengths;

    std::size_t size() const noexcept { return matrix.n; }
    void multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const { matrix.multiply(x, y); }
    double trace() const;
};

/// L = S - W, or I - S^-1/2 W S^-1/2 for the normalized kind.
LaplacianMatrix build_laplacian(const Graph& g, LaplacianKind kind);

/// Returns the graph with weights W_ij / sqrt(s_i s_j).
Graph normalize_weights(const Graph& g);

struct ComponentLabeling {
    std::vector<std::size_t> labels;
    std::size_t count = 0;
    std::vector<std::size_t> sizes;
};

/// Labels are ordered by the smallest node index they contain.
ComponentLabeling connected_components(const Graph& g);

/// Subgraph induced by `nodes` (ascending internal indices), ids preserved.
Graph induced_subgraph(const Graph& g, std::span<const std::size_t> nodes);

/// Compensated (Neumaier) sum.
double stable_sum(std::span<const double> values);

}  // namespace lapinc
