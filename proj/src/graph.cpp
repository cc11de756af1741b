#include "lapinc/graph.hpp"

#include "lapinc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <queue>
#include <random>
#include <sstream>
#include <unordered_map>

namespace lapinc {

namespace {

std::string line_error(std::size_t line_no, const std::string& msg) {
    return "line " + std::to_string(line_no) + ": " + msg;
}

bool parse_node_id(const std::string& tok, std::int64_t& out) {
    if (tok.empty() || tok[0] == '-' || tok[0] == '+') return false;
    std::size_t pos = 0;
    try {
        const long long v = std::stoll(tok, &pos);
        if (pos != tok.size() || v < 0) return false;
        out = v;
        return true;
    } catch (const std::exception&) {
        return false;
    }
}

bool parse_double(const std::string& tok, double& out) {
    std::size_t pos = 0;
    try {
        out = std::stod(tok, &pos);
        return pos == tok.size();
    } catch (const std::exception&) {
        return false;
    }
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

}  // namespace

double stable_sum(std::span<const double> values) {
    double sum = 0.0;
    double comp = 0.0;
    for (const double v : values) {
        const double t = sum + v;
        if (std::abs(sum) >= std::abs(v)) {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    return sum + comp;
}

// ---------------------------------------------------------------------------
// Graph

Graph Graph::from_edges(std::size_t n, std::span<const Edge> edges,
                        std::vector<std::int64_t> original_ids) {
    if (!original_ids.empty() && original_ids.size() != n) {
        throw PreconditionError("original id map has " + std::to_string(original_ids.size()) +
                                " entries for " + std::to_string(n) + " nodes");
    }
    // (min, max) -> summed weight
    std::map<std::pair<std::size_t, std::size_t>, double> pairs;
    for (const auto& e : edges) {
        if (e.u >= n || e.v >= n) {
            throw PreconditionError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                    ") out of range for n = " + std::to_string(n));
        }
        if (e.u == e.v) {
            throw PreconditionError("self-loop on node " + std::to_string(e.u));
        }
        if (!std::isfinite(e.w) || e.w < 0.0) {
            throw PreconditionError("invalid weight on edge (" + std::to_string(e.u) + ", " +
                                    std::to_string(e.v) + ")");
        }
        pairs[{std::min(e.u, e.v), std::max(e.u, e.v)}] += e.w;
    }

    Graph g;
    g.n_ = n;
    std::vector<std::size_t> degree(n, 0);
    for (const auto& [key, w] : pairs) {
        if (w > 0.0) {
            ++degree[key.first];
            ++degree[key.second];
            ++g.m_;
        }
    }
    g.row_ptr_.assign(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i) g.row_ptr_[i + 1] = g.row_ptr_[i] + degree[i];
    g.cols_.resize(g.row_ptr_[n]);
    g.vals_.resize(g.row_ptr_[n]);
    std::vector<std::size_t> fill(g.row_ptr_.begin(), g.row_ptr_.end() - 1);
    // Ascending (i, j) iteration keeps every row sorted by column.
    for (const auto& [key, w] : pairs) {
        if (w <= 0.0) continue;
        const auto [i, j] = key;
        g.cols_[fill[i]] = j;
        g.vals_[fill[i]++] = w;
    }
    for (const auto& [key, w] : pairs) {
        if (w <= 0.0) continue;
        const auto [i, j] = key;
        g.cols_[fill[j]] = i;
        g.vals_[fill[j]++] = w;
    }
    for (std::size_t i = 0; i < n; ++i) {
        // The second pass appends lower-triangle entries after upper ones; restore order.
        std::vector<std::size_t> order(degree[i]);
        std::iota(order.begin(), order.end(), g.row_ptr_[i]);
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return g.cols_[a] < g.cols_[b]; });
        std::vector<std::size_t> c(degree[i]);
        std::vector<double> v(degree[i]);
        for (std::size_t k = 0; k < order.size(); ++k) {
            c[k] = g.cols_[order[k]];
            v[k] = g.vals_[order[k]];
        }
        std::copy(c.begin(), c.end(), g.cols_.begin() + static_cast<std::ptrdiff_t>(g.row_ptr_[i]));
        std::copy(v.begin(), v.end(), g.vals_.begin() + static_cast<std::ptrdiff_t>(g.row_ptr_[i]));
    }
    if (original_ids.empty()) {
        original_ids.resize(n);
        std::iota(original_ids.begin(), original_ids.end(), std::int64_t{0});
    }
    g.ids_ = std::move(original_ids);
    return g;
}

double Graph::weight(std::size_t i, std::size_t j) const {
    const auto cols = neighbors(i);
    const auto it = std::lower_bound(cols.begin(), cols.end(), j);
    if (it == cols.end() || *it != j) return 0.0;
    return weights(i)[static_cast<std::size_t>(it - cols.begin())];
}

std::vector<Edge> Graph::edges() const {
    std::vector<Edge> out;
    out.reserve(m_);
    for (std::size_t i = 0; i < n_; ++i) {
        const auto cols = neighbors(i);
        const auto w = weights(i);
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (cols[k] > i) out.push_back({i, cols[k], w[k]});
        }
    }
    return out;
}

Graph Graph::scaled(double factor) const {
    if (!(factor > 0.0) || !std::isfinite(factor)) {
        throw PreconditionError("scale factor must be positive and finite");
    }
    Graph g = *this;
    for (double& v : g.vals_) v *= factor;
    return g;
}

// ---------------------------------------------------------------------------
// Loaders

Graph load_edge_list(std::istream& in, const EdgeListOptions& options) {
    struct RawEdge {
        std::int64_t u, v;
        double w;
    };
    std::vector<RawEdge> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (tok.size() != 2 && tok.size() != 3) {
            throw ParseError(line_error(line_no, "expected 'u v' or 'u v w'"));
        }
        RawEdge e{0, 0, options.default_weight};
        if (!parse_node_id(tok[0], e.u) || !parse_node_id(tok[1], e.v)) {
            throw ParseError(line_error(line_no, "node ids must be nonnegative integers"));
        }
        if (tok.size() == 3 && !parse_double(tok[2], e.w)) {
            throw ParseError(line_error(line_no, "malformed weight '" + tok[2] + "'"));
        }
        if (e.u == e.v) throw ParseError(line_error(line_no, "self-loop on node " + tok[0]));
        if (!std::isfinite(e.w) || e.w < 0.0) {
            throw ParseError(line_error(line_no, "weight must be finite and nonnegative"));
        }
        raw.push_back(e);
    }

    std::vector<std::int64_t> ids;
    ids.reserve(raw.size() * 2);
    for (const auto& e : raw) {
        ids.push_back(e.u);
        ids.push_back(e.v);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    std::unordered_map<std::int64_t, std::size_t> index;
    for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);

    std::vector<Edge> edges;
    edges.reserve(raw.size());
    for (const auto& e : raw) edges.push_back({index.at(e.u), index.at(e.v), e.w});
    const std::size_t n = ids.size();
    return Graph::from_edges(n, edges, std::move(ids));
}

Graph load_matrix_market(std::istream& in) {
    std::string line;
    std::size_t line_no = 1;
    if (!std::getline(in, line)) throw ParseError("empty MatrixMarket input");
    std::istringstream header(line);
    std::string banner, object, format, field, symmetry;
    header >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || lowercase(object) != "matrix" ||
        lowercase(format) != "coordinate") {
        throw ParseError("expected '%%MatrixMarket matrix coordinate' header");
    }
    field = lowercase(field);
    symmetry = lowercase(symmetry);
    if (field != "real" && field != "integer" && field != "pattern") {
        throw ParseError("unsupported MatrixMarket field '" + field + "'");
    }
    if (symmetry != "symmetric" && symmetry != "general") {
        throw ParseError("unsupported MatrixMarket symmetry '" + symmetry + "'");
    }
    const bool pattern = field == "pattern";

    std::size_t rows = 0, cols = 0, entries = 0;
    bool have_size = false;
    std::map<std::pair<std::size_t, std::size_t>, double> general;
    std::vector<Edge> edges;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '%') continue;
        std::istringstream fields(line);
        std::vector<std::string> tok;
        for (std::string t; fields >> t;) tok.push_back(t);
        if (!have_size) {
            std::int64_t r = 0, c = 0, e = 0;
            if (tok.size() != 3 || !parse_node_id(tok[0], r) || !parse_node_id(tok[1], c) ||
                !parse_node_id(tok[2], e)) {
                throw ParseError(line_error(line_no, "malformed size line"));
            }
            rows = static_cast<std::size_t>(r);
            cols = static_cast<std::size_t>(c);
            entries = static_cast<std::size_t>(e);
            if (rows != cols) throw ParseError("matrix must be square");
            have_size = true;
            continue;
        }
        const std::size_t expect = pattern ? 2 : 3;
        std::int64_t i1 = 0, j1 = 0;
        double w = 1.0;
        if (tok.size() != expect || !parse_node_id(tok[0], i1) || !parse_node_id(tok[1], j1) ||
            (!pattern && !parse_double(tok[2], w))) {
            throw ParseError(line_error(line_no, "malformed entry"));
        }
        if (i1 < 1 || j1 < 1 || static_cast<std::size_t>(i1) > rows ||
            static_cast<std::size_t>(j1) > rows) {
            throw ParseError(line_error(line_no, "index out of range"));
        }
        if (i1 == j1) throw ParseError(line_error(line_no, "self-loop on node " + tok[0]));
        if (!std::isfinite(w) || w < 0.0) {
            throw ParseError(line_error(line_no, "weight must be finite and nonnegative"));
        }
        const auto i = static_cast<std::size_t>(i1 - 1);
        const auto j = static_cast<std::size_t>(j1 - 1);
        if (symmetry == "symmetric") {
            edges.push_back({i, j, w});
        } else {
            general[{i, j}] += w;
        }
        ++seen;
    }
    if (!have_size) throw ParseError("missing MatrixMarket size line");
    if (seen != entries) {
        throw ParseError("expected " + std::to_string(entries) + " entries, found " +
                         std::to_string(seen));
    }
    if (symmetry == "general") {
        for (const auto& [key, w] : general) {
            const auto it = general.find({key.second, key.first});
            const double other = it == general.end() ? 0.0 : it->second;
            if (other != w) {
                throw ParseError("asymmetric entry (" + std::to_string(key.first + 1) + ", " +
                                 std::to_string(key.second + 1) + ")");
            }
            if (key.first < key.second) edges.push_back({key.first, key.second, w});
        }
    }
    std::vector<std::int64_t> ids(rows);
    std::iota(ids.begin(), ids.end(), std::int64_t{1});
    return Graph::from_edges(rows, edges, std::move(ids));
}

Graph load_graph_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open '" + path + "'");
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".mtx") return load_matrix_market(in);
    return load_edge_list(in);
}

void write_edge_list(std::ostream& out, const Graph& g) {
    const auto& ids = g.original_ids();
    char buf[64];
    for (const auto& e : g.edges()) {
        std::snprintf(buf, sizeof buf, "%.17g", e.w);
        out << ids[e.u] << ' ' << ids[e.v] << ' ' << buf << '\n';
    }
}

// ---------------------------------------------------------------------------
// Generator

GeneratedGraph generate_erdos_renyi(std::size_t n, double p, std::uint64_t seed) {
    if (n < 2) throw PreconditionError("Erdos-Renyi graph needs n >= 2");
    if (!(p > 0.0) || p > 1.0) throw PreconditionError("edge probability must be in (0, 1]");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    constexpr int max_attempts = 100;
    GeneratedGraph out;
    for (int attempt = 1; attempt <= max_attempts; ++attempt) {
        std::vector<Edge> edges;
        edges.reserve(static_cast<std::size_t>(p * static_cast<double>(n) * (n - 1) / 2.0 * 1.1));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (p >= 1.0 || unif(rng) < p) edges.push_back({i, j, 1.0});
            }
        }
        Graph g = Graph::from_edges(n, edges);
        const auto cc = connected_components(g);
        out.attempts = attempt;
        if (cc.count == 1) {
            out.graph = std::move(g);
            return out;
        }
        if (attempt == max_attempts) {
            const auto largest = static_cast<std::size_t>(
                std::max_element(cc.sizes.begin(), cc.sizes.end()) - cc.sizes.begin());
            std::vector<std::size_t> nodes;
            for (std::size_t i = 0; i < n; ++i) {
                if (cc.labels[i] == largest) nodes.push_back(i);
            }
            out.graph = induced_subgraph(g, nodes);
            out.largest_component_fallback = true;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Strengths and Laplacians

StrengthVector strengths(const Graph& g) {
    StrengthVector s;
    s.node.resize(g.node_count());
    for (std::size_t i = 0; i < g.node_count(); ++i) s.node[i] = stable_sum(g.weights(i));
    s.total = stable_sum(s.node);
    return s;
}

std::string to_string(LaplacianKind kind) {
    return kind == LaplacianKind::Normalized ? "normalized" : "unnormalized";
}

LaplacianKind laplacian_kind_from_string(const std::string& name) {
    const auto lower = lowercase(name);
    if (lower == "unnormalized" || lower == "u") return LaplacianKind::Unnormalized;
    if (lower == "normalized" || lower == "n") return LaplacianKind::Normalized;
    throw PreconditionError("unknown Laplacian kind '" + name + "'");
}

void CsrMatrix::multiply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    if (static_cast<std::size_t>(x.size()) != n) {
        throw PreconditionError("dimension mismatch in sparse multiply");
    }
    y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) acc += vals[k] * x[cols[k]];
        y[static_cast<Eigen::Index>(i)] = acc;
    }
}

Eigen::MatrixXd CsrMatrix::to_dense() const {
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(N, N);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cols[k])) = vals[k];
        }
    }
    return d;
}

double CsrMatrix::diagonal(std::size_t i) const {
    for (std::size_t k = row_ptr[i]; k < row_ptr[i + 1]; ++k) {
        if (cols[k] == i) return vals[k];
    }
    return 0.0;
}

double LaplacianMatrix::trace() const {
    std::vector<double> d(matrix.n);
    for (std::size_t i = 0; i < matrix.n; ++i) d[i] = matrix.diagonal(i);
    return stable_sum(d);
}

LaplacianMatrix build_laplacian(const Graph& g, LaplacianKind kind) {
    LaplacianMatrix L;
    L.kind = kind;
    L.strengths = strengths(g);
    const auto& s = L.strengths.node;
    const std::size_t n = g.node_count();
    std::vector<double> inv_sqrt;
    if (kind == LaplacianKind::Normalized) {
        inv_sqrt.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (!(s[i] > 0.0)) {
                throw PreconditionError("normalized Laplacian undefined: node " +
                                        std::to_string(g.original_ids()[i]) + " is isolated");
            }
            inv_sqrt[i] = 1.0 / std::sqrt(s[i]);
        }
    }

    auto& M = L.matrix;
    M.n = n;
    M.row_ptr.assign(n + 1, 0);
    M.cols.reserve(2 * g.edge_count() + n);
    M.vals.reserve(2 * g.edge_count() + n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto cols = g.neighbors(i);
        const auto w = g.weights(i);
        bool diag_done = false;
        const double diag = kind == LaplacianKind::Normalized ? 1.0 : s[i];
        for (std::size_t k = 0; k <= cols.size(); ++k) {
            if (!diag_done && (k == cols.size() || cols[k] > i)) {
                M.cols.push_back(i);
                M.vals.push_back(diag);
                diag_done = true;
            }
            if (k == cols.size()) break;
            const double v = kind == LaplacianKind::Normalized
                                 ? -w[k] * inv_sqrt[i] * inv_sqrt[cols[k]]
                                 : -w[k];
            M.cols.push_back(cols[k]);
            M.vals.push_back(v);
        }
        M.row_ptr[i + 1] = M.cols.size();
    }
    return L;
}

Graph normalize_weights(const Graph& g) {
    const auto s = strengths(g);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        if (!(s.node[i] > 0.0)) {
            throw PreconditionError("cannot normalize weights: node " +
                                    std::to_string(g.original_ids()[i]) + " is isolated");
        }
    }
    auto edges = g.edges();
    for (auto& e : edges) e.w = e.w / std::sqrt(s.node[e.u] * s.node[e.v]);
    return Graph::from_edges(g.node_count(), edges, g.original_ids());
}

ComponentLabeling connected_components(const Graph& g) {
    constexpr auto unset = static_cast<std::size_t>(-1);
    const std::size_t n = g.node_count();
    ComponentLabeling out;
    out.labels.assign(n, unset);
    std::queue<std::size_t> frontier;
    for (std::size_t start = 0; start < n; ++start) {
        if (out.labels[start] != unset) continue;
        const std::size_t label = out.count++;
        out.sizes.push_back(0);
        out.labels[start] = label;
        frontier.push(start);
        while (!frontier.empty()) {
            const std::size_t u = frontier.front();
            frontier.pop();
            ++out.sizes[label];
            const auto cols = g.neighbors(u);
            const auto w = g.weights(u);
            for (std::size_t k = 0; k < cols.size(); ++k) {
                if (w[k] > 0.0 && out.labels[cols[k]] == unset) {
                    out.labels[cols[k]] = label;
                    frontier.push(cols[k]);
                }
            }
        }
    }
    return out;
}

Graph induced_subgraph(const Graph& g, std::span<const std::size_t> nodes) {
    constexpr auto unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> remap(g.node_count(), unset);
    std::vector<std::int64_t> ids;
    ids.reserve(nodes.size());
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        remap[nodes[k]] = k;
        ids.push_back(g.original_ids()[nodes[k]]);
    }
    std::vector<Edge> edges;
    for (const auto& e : g.edges()) {
        if (remap[e.u] != unset && remap[e.v] != unset) {
            edges.push_back({remap[e.u], remap[e.v], e.w});
        }
    }
    return Graph::from_edges(nodes.size(), edges, std::move(ids));
}

}  // namespace lapinc
