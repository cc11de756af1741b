#pragma once

#include "lapinc/eigensolve.hpp"
#include "lapinc/graph.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lapinc {

struct ClusterAssignment {
    /// Cluster id per node; ids are numbered in order of first appearance.
    std::vector<std::size_t> labels;
    std::size_t K = 0;
    double inertia = 0.0;

    std::vector<std::size_t> sizes() const;
};

struct KMeansOptions {
    std::uint64_t seed = 1;
    std::size_t restarts = 10;
    std::size_t max_iter = 100;
    /// Scale every row to unit length first (Ng-Jordan-Weiss variant).
    bool normalize_rows = false;
};

/// Lloyd iterations from k-means++ seeds, best of `restarts` by inertia.
ClusterAssignment kmeans(const Eigen::MatrixXd& rows, std::size_t K, const KMeansOptions& options = {});

/// Newman modularity with ordered-pair weight sums, so W(V, V) = s.
double modularity(const Graph& g, const ClusterAssignment& a);

struct NormalizedCut {
    double nc = 0.0;
    /// nc / K
    double snc = 0.0;
};

NormalizedCut scaled_normalized_cut(const Graph& g, const ClusterAssignment& a);

struct SizeStats {
    double scaled_median = 0.0;  // lower median for an even cluster count
    double scaled_max = 0.0;
};

SizeStats cluster_size_stats(const ClusterAssignment& a, std::size_t n);

/// Sum of the K smallest eigenvalues over trace(L).
double scaled_spectrum_energy(const EigenBasis& basis, const LaplacianMatrix& L, std::size_t K);

struct MetricsRecord {
    std::size_t K = 0;
    double modularity = 0.0;
    double scaled_nc = 0.0;
    double scaled_median_size = 0.0;
    double scaled_max_size = 0.0;
    double scaled_spectrum_energy = 0.0;

    bool operator==(const MetricsRecord&) const = default;
};

/// All five metrics; modularity and cut are evaluated on `g_metric`.
MetricsRecord metrics_bundle(const Graph& g_metric, const EigenBasis& basis,
                             const LaplacianMatrix& L, const ClusterAssignment& a);

std::string metrics_csv_header();
std::string to_csv_row(const MetricsRecord& m);

nlohmann::json to_json(const MetricsRecord& m);
MetricsRecord metrics_from_json(const nlohmann::json& j);

}  // namespace lapinc
