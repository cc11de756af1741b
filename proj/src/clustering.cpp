#include "lapinc/clustering.hpp"

#include "lapinc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>

namespace lapinc {

std::vector<std::size_t> ClusterAssignment::sizes() const {
    std::vector<std::size_t> out(K, 0);
    for (const auto c : labels) ++out.at(c);
    return out;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct LloydResult {
    std::vector<std::size_t> labels;
    double inertia = 0.0;
};

std::size_t nearest(const RowMatrix& X, Eigen::Index i, const RowMatrix& C, double& dist) {
    std::size_t best = 0;
    dist = std::numeric_limits<double>::infinity();
    for (Eigen::Index c = 0; c < C.rows(); ++c) {
        const double d = (X.row(i) - C.row(c)).squaredNorm();
        if (d < dist) {
            dist = d;
            best = static_cast<std::size_t>(c);
        }
    }
    return best;
}

RowMatrix seed_plus_plus(const RowMatrix& X, std::size_t K, std::mt19937_64& rng) {
    const Eigen::Index n = X.rows();
    RowMatrix C(static_cast<Eigen::Index>(K), X.cols());
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    C.row(0) = X.row(pick(rng));
    std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    for (std::size_t c = 1; c < K; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& d = d2[static_cast<std::size_t>(i)];
            d = std::min(d, (X.row(i) - C.row(static_cast<Eigen::Index>(c - 1))).squaredNorm());
            total += d;
        }
        Eigen::Index chosen = 0;
        if (total > 0.0) {
            std::uniform_real_distribution<double> unif(0.0, total);
            double target = unif(rng);
            chosen = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= d2[static_cast<std::size_t>(i)];
                if (target < 0.0) {
                    chosen = i;
                    break;
                }
            }
        } else {
            chosen = pick(rng);
        }
        C.row(static_cast<Eigen::Index>(c)) = X.row(chosen);
    }
    return C;
}

LloydResult lloyd(const RowMatrix& X, RowMatrix C, std::size_t max_iter) {
    const auto n = static_cast<std::size_t>(X.rows());
    const auto K = static_cast<std::size_t>(C.rows());
    LloydResult r;
    r.labels.assign(n, 0);
    std::vector<double> dist(n, 0.0);
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        bool changed = iter == 0;
        for (std::size_t i = 0; i < n; ++i) {
            const auto c = nearest(X, static_cast<Eigen::Index>(i), C, dist[i]);
            if (c != r.labels[i]) changed = true;
            r.labels[i] = c;
        }
        std::vector<std::size_t> count(K, 0);
        for (const auto c : r.labels) ++count[c];
        // Empty clusters take the point farthest from its centroid among clusters
        // that can spare one.
        for (std::size_t c = 0; c < K; ++c) {
            if (count[c] > 0) continue;
            std::size_t far = n;
            for (std::size_t i = 0; i < n; ++i) {
                if (count[r.labels[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
            }
            if (far == n) break;
            --count[r.labels[far]];
            r.labels[far] = c;
            ++count[c];
            dist[far] = 0.0;
            changed = true;
        }
        C.setZero();
        for (std::size_t i = 0; i < n; ++i) {
            C.row(static_cast<Eigen::Index>(r.labels[i])) += X.row(static_cast<Eigen::Index>(i));
        }
        for (std::size_t c = 0; c < K; ++c) {
            if (count[c] > 0) C.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(count[c]);
        }
        if (!changed) break;
    }
    r.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r.inertia += (X.row(static_cast<Eigen::Index>(i)) -
                      C.row(static_cast<Eigen::Index>(r.labels[i])))
                         .squaredNorm();
    }
    return r;
}

// Renumbers cluster ids by first appearance.
void canonical_ids(std::vector<std::size_t>& labels, std::size_t K) {
    constexpr auto unset = static_cast<std::size_t>(-1);
    std::vector<std::size_t> remap(K, unset);
    std::size_t next = 0;
    for (auto& c : labels) {
        if (remap[c] == unset) remap[c] = next++;
        c = remap[c];
    }
}

void check_assignment(const Graph& g, const ClusterAssignment& a) {
    if (a.labels.size() != g.node_count()) {
        throw PreconditionError("assignment has " + std::to_string(a.labels.size()) +
                                " labels for " + std::to_string(g.node_count()) + " nodes");
    }
    for (const auto c : a.labels) {
        if (c >= a.K) throw PreconditionError("cluster id out of range");
    }
}

// Ordered-pair weight inside each cluster and total strength (volume) per cluster.
void cluster_weights(const Graph& g, const ClusterAssignment& a, std::vector<double>& internal,
                     std::vector<double>& cut, std::vector<double>& volume) {
    internal.assign(a.K, 0.0);
    cut.assign(a.K, 0.0);
    volume.assign(a.K, 0.0);
    for (std::size_t i = 0; i < g.node_count(); ++i) {
        const auto cols = g.neighbors(i);
        const auto w = g.weights(i);
        const auto ci = a.labels[i];
        for (std::size_t k = 0; k < cols.size(); ++k) {
            volume[ci] += w[k];
            if (a.labels[cols[k]] == ci) {
                internal[ci] += w[k];
            } else {
                cut[ci] += w[k];
            }
        }
    }
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

ClusterAssignment kmeans(const Eigen::MatrixXd& rows, std::size_t K, const KMeansOptions& options) {
    const auto n = static_cast<std::size_t>(rows.rows());
    if (K == 0) throw PreconditionError("k-means needs K >= 1");
    if (K > n) {
        throw PreconditionError("k-means with K = " + std::to_string(K) + " on " +
                                std::to_string(n) + " rows");
    }
    if (!rows.allFinite()) throw PreconditionError("k-means rows must be finite");
    RowMatrix X = rows;
    if (options.normalize_rows) {
        for (Eigen::Index i = 0; i < X.rows(); ++i) {
            const double norm = X.row(i).norm();
            if (norm > 0.0) X.row(i) /= norm;
        }
    }
    ClusterAssignment best;
    best.K = K;
    best.inertia = std::numeric_limits<double>::infinity();
    const std::size_t restarts = std::max<std::size_t>(options.restarts, 1);
    for (std::size_t r = 0; r < restarts; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed),
                          static_cast<std::uint32_t>(options.seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);
        auto result = lloyd(X, seed_plus_plus(X, K, rng), std::max<std::size_t>(options.max_iter, 1));
        if (result.inertia < best.inertia) {
            best.labels = std::move(result.labels);
            best.inertia = result.inertia;
        }
    }
    canonical_ids(best.labels, K);
    return best;
}

double modularity(const Graph& g, const ClusterAssignment& a) {
    check_assignment(g, a);
    std::vector<double> internal, cut, volume;
    cluster_weights(g, a, internal, cut, volume);
    const double total = stable_sum(volume);
    if (!(total > 0.0)) throw PreconditionError("modularity undefined for a graph without edges");
    double q = 0.0;
    for (std::size_t c = 0; c < a.K; ++c) {
        const double frac = volume[c] / total;
        q += internal[c] / total - frac * frac;
    }
    return q;
}

NormalizedCut scaled_normalized_cut(const Graph& g, const ClusterAssignment& a) {
    check_assignment(g, a);
    std::vector<double> internal, cut, volume;
    cluster_weights(g, a, internal, cut, volume);
    NormalizedCut out;
    for (std::size_t c = 0; c < a.K; ++c) {
        if (!(volume[c] > 0.0)) {
            throw PreconditionError("normalized cut undefined: cluster " + std::to_string(c) +
                                    " has zero strength");
        }
        out.nc += cut[c] / volume[c];
    }
    out.snc = out.nc / static_cast<double>(a.K);
    return out;
}

SizeStats cluster_size_stats(const ClusterAssignment& a, std::size_t n) {
    if (a.K == 0 || n == 0) throw PreconditionError("size statistics need K >= 1 and n >= 1");
    auto sizes = a.sizes();
    std::sort(sizes.begin(), sizes.end());
    SizeStats s;
    s.scaled_median = static_cast<double>(sizes[(sizes.size() - 1) / 2]) / static_cast<double>(n);
    s.scaled_max = static_cast<double>(sizes.back()) / static_cast<double>(n);
    return s;
}

double scaled_spectrum_energy(const EigenBasis& basis, const LaplacianMatrix& L, std::size_t K) {
    if (K > basis.size()) {
        throw PreconditionError("spectrum energy for K = " + std::to_string(K) +
                                " needs that many eigenvalues");
    }
    const double trace = L.trace();
    if (!(trace > 0.0)) throw PreconditionError("spectrum energy undefined: zero trace");
    return stable_sum(std::span<const double>(basis.values.data(), K)) / trace;
}

MetricsRecord metrics_bundle(const Graph& g_metric, const EigenBasis& basis,
                             const LaplacianMatrix& L, const ClusterAssignment& a) {
    if (g_metric.node_count() != L.size() || basis.dimension() != L.size()) {
        throw PreconditionError("metric graph, basis and Laplacian sizes differ");
    }
    MetricsRecord m;
    m.K = a.K;
    m.modularity = modularity(g_metric, a);
    m.scaled_nc = scaled_normalized_cut(g_metric, a).snc;
    const auto sizes = cluster_size_stats(a, L.size());
    m.scaled_median_size = sizes.scaled_median;
    m.scaled_max_size = sizes.scaled_max;
    m.scaled_spectrum_energy = scaled_spectrum_energy(basis, L, a.K);
    return m;
}

std::string metrics_csv_header() {
    return "K,modularity,scaled_nc,scaled_median_size,scaled_max_size,scaled_spectrum_energy";
}

std::string to_csv_row(const MetricsRecord& m) {
    return std::to_string(m.K) + ',' + fmt17(m.modularity) + ',' + fmt17(m.scaled_nc) + ',' +
           fmt17(m.scaled_median_size) + ',' + fmt17(m.scaled_max_size) + ',' +
           fmt17(m.scaled_spectrum_energy);
}

nlohmann::json to_json(const MetricsRecord& m) {
    return {{"K", m.K},
            {"modularity", m.modularity},
            {"scaled_nc", m.scaled_nc},
            {"scaled_median_size", m.scaled_median_size},
            {"scaled_max_size", m.scaled_max_size},
            {"scaled_spectrum_energy", m.scaled_spectrum_energy}};
}

MetricsRecord metrics_from_json(const nlohmann::json& j) {
    try {
        MetricsRecord m;
        m.K = j.at("K").get<std::size_t>();
        m.modularity = j.at("modularity").get<double>();
        m.scaled_nc = j.at("scaled_nc").get<double>();
        m.scaled_median_size = j.at("scaled_median_size").get<double>();
        m.scaled_max_size = j.at("scaled_max_size").get<double>();
        m.scaled_spectrum_energy = j.at("scaled_spectrum_energy").get<double>();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed metrics record: ") + e.what());
    }
}

}  // namespace lapinc
