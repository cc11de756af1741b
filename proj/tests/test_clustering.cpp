#include "doctest.h"

#include "lapinc/clustering.hpp"
#include "lapinc/errors.hpp"
#include "support.hpp"

#include <algorithm>
#include <map>
#include <numeric>

using namespace lapinc;
using namespace lapinc::testing;

namespace {

ClusterAssignment assignment(std::vector<std::size_t> labels, std::size_t K) {
    ClusterAssignment a;
    a.labels = std::move(labels);
    a.K = K;
    return a;
}

// Same partition up to renaming of cluster ids.
bool same_partition(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    if (a.size() != b.size()) return false;
    std::map<std::size_t, std::size_t> ab, ba;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (ab.emplace(a[i], b[i]).first->second != b[i]) return false;
        if (ba.emplace(b[i], a[i]).first->second != a[i]) return false;
    }
    return true;
}

EigenBasis full_basis(const Graph& g) {
    const auto L = build_laplacian(g, LaplacianKind::Unnormalized);
    return extend_to(L, connected_components(g), g.node_count(), SolverConfig{});
}

}  // namespace

TEST_CASE("kmeans fixtures") {
    Eigen::MatrixXd rows(4, 1);
    rows << 0.0, 0.1, 5.0, 5.1;
    const auto a = kmeans(rows, 2);
    CHECK(a.labels == std::vector<std::size_t>{0, 0, 1, 1});

    const Eigen::MatrixXd same = Eigen::MatrixXd::Ones(5, 3);
    const auto one = kmeans(same, 1);
    CHECK(one.inertia == 0.0);
    CHECK(std::all_of(one.labels.begin(), one.labels.end(), [](auto c) { return c == 0; }));

    const auto g = two_triangles();
    const auto L = build_laplacian(g, LaplacianKind::Unnormalized);
    const auto b = extend_to(L, connected_components(g), 2, SolverConfig{});
    const auto split = kmeans(b.vectors, 2);
    CHECK(split.labels == std::vector<std::size_t>{0, 0, 0, 1, 1, 1});

    CHECK_THROWS_AS(kmeans(rows, 5), PreconditionError);
    CHECK_THROWS_AS(kmeans(rows, 0), PreconditionError);
}

TEST_CASE("kmeans: every cluster non-empty, reproducible") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    Eigen::MatrixXd rows(60, 3);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = 0; j < rows.cols(); ++j) rows(i, j) = normal(rng) + 4.0 * (i % 4 == j);
    }
    for (std::size_t K = 1; K <= 8; ++K) {
        KMeansOptions opts;
        opts.seed = 42;
        const auto a = kmeans(rows, K, opts);
        const auto b = kmeans(rows, K, opts);
        CHECK(a.labels == b.labels);
        CHECK(a.inertia == b.inertia);
        for (const auto s : a.sizes()) CHECK(s > 0);
    }
    // Duplicate points force the empty-cluster repair.
    Eigen::MatrixXd dup = Eigen::MatrixXd::Zero(6, 2);
    dup(5, 0) = 1.0;
    const auto d = kmeans(dup, 3);
    for (const auto s : d.sizes()) CHECK(s > 0);
}

TEST_CASE("modularity fixtures") {
    CHECK(modularity(two_triangles(), assignment({0, 0, 0, 1, 1, 1}, 2)) ==
          doctest::Approx(0.5).epsilon(1e-15));
    CHECK(modularity(single_edge(), assignment({0, 1}, 2)) == doctest::Approx(-0.5));
    CHECK(modularity(path3(), assignment({0, 0, 0}, 1)) == 0.0);
    CHECK_THROWS_AS(modularity(make_graph(2, {}), assignment({0, 1}, 2)), PreconditionError);
}

TEST_CASE("normalized cut fixtures") {
    const auto tt = scaled_normalized_cut(two_triangles(), assignment({0, 0, 0, 1, 1, 1}, 2));
    CHECK(tt.nc == 0.0);
    CHECK(tt.snc == 0.0);
    const auto e = scaled_normalized_cut(single_edge(), assignment({0, 1}, 2));
    CHECK(e.nc == doctest::Approx(2.0));
    CHECK(e.snc == doctest::Approx(1.0));
    const auto p = scaled_normalized_cut(path3(), assignment({0, 0, 1}, 2));
    CHECK(p.nc == doctest::Approx(4.0 / 3.0));
    CHECK(p.snc == doctest::Approx(2.0 / 3.0));
    const auto isolated = make_graph(3, {{0, 1, 1.0}});
    CHECK_THROWS_AS(scaled_normalized_cut(isolated, assignment({0, 0, 1}, 2)), PreconditionError);
}

TEST_CASE("cluster size statistics") {
    auto stats = [](std::vector<std::size_t> labels, std::size_t K) {
        return cluster_size_stats(assignment(std::move(labels), K), 6);
    };
    const auto a = stats({0, 0, 0, 1, 1, 1}, 2);
    CHECK(a.scaled_median == 0.5);
    CHECK(a.scaled_max == 0.5);
    const auto b = stats({0, 1, 1, 2, 2, 2}, 3);
    CHECK(b.scaled_median == doctest::Approx(2.0 / 6.0));
    CHECK(b.scaled_max == doctest::Approx(3.0 / 6.0));
    const auto c = stats({0, 1, 2, 2, 2, 2}, 3);
    CHECK(c.scaled_median == doctest::Approx(1.0 / 6.0));
    CHECK(c.scaled_max == doctest::Approx(4.0 / 6.0));
    // even count: lower median
    const auto d = stats({0, 1, 1, 2, 2, 3}, 4);
    CHECK(d.scaled_median == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("spectrum energy") {
    const auto g = path3();
    const auto L = build_laplacian(g, LaplacianKind::Unnormalized);
    const auto b = full_basis(g);
    CHECK(scaled_spectrum_energy(b, L, 2) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(scaled_spectrum_energy(b, L, 1) == 0.0);
    CHECK(scaled_spectrum_energy(b, L, 3) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(scaled_spectrum_energy(b, L, 4), PreconditionError);
    const auto empty = make_graph(2, {});
    const auto Le = build_laplacian(empty, LaplacianKind::Unnormalized);
    CHECK_THROWS_AS(scaled_spectrum_energy(full_basis(empty), Le, 1), PreconditionError);
}

TEST_CASE("metrics bundle and serialization") {
    const auto g = two_triangles();
    const auto L = build_laplacian(g, LaplacianKind::Unnormalized);
    const auto b = extend_to(L, connected_components(g), 2, SolverConfig{});
    const auto m = metrics_bundle(g, b, L, assignment({0, 0, 0, 1, 1, 1}, 2));
    CHECK(m.K == 2);
    CHECK(m.modularity == doctest::Approx(0.5));
    CHECK(m.scaled_nc == 0.0);
    CHECK(m.scaled_median_size == 0.5);
    CHECK(m.scaled_max_size == 0.5);
    CHECK(m.scaled_spectrum_energy == 0.0);

    CHECK(metrics_from_json(nlohmann::json::parse(to_json(m).dump())) == m);
    CHECK(to_csv_row(m) == "2,0.5,0,0.5,0.5,0");
    CHECK(metrics_csv_header() ==
          "K,modularity,scaled_nc,scaled_median_size,scaled_max_size,scaled_spectrum_energy");

    const auto p = path3();
    const auto Lp = build_laplacian(p, LaplacianKind::Unnormalized);
    const auto mp = metrics_bundle(p, full_basis(p), Lp, assignment({0, 0, 1}, 2));
    CHECK(mp.scaled_nc == doctest::Approx(2.0 / 3.0));
    const auto single = metrics_bundle(p, full_basis(p), Lp, assignment({0, 0, 0}, 1));
    CHECK(single.modularity == 0.0);
    CHECK(single.scaled_nc == 0.0);
}

TEST_CASE("property: metric invariants on random partitions") {
    std::mt19937_64 rng(11);
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto g = random_connected(25, seed);
        const auto L = build_laplacian(g, LaplacianKind::Unnormalized);
        const auto b = full_basis(g);
        const std::size_t n = g.node_count();
        CHECK(modularity(g, assignment(std::vector<std::size_t>(n, 0), 1)) == doctest::Approx(0.0));
        double prev = -1.0;
        for (std::size_t K = 1; K <= n; ++K) {
            const double energy = scaled_spectrum_energy(b, L, K);
            CHECK(energy >= prev - 1e-12);
            CHECK(energy >= -1e-12);
            CHECK(energy <= 1.0 + 1e-12);
            prev = energy;
        }
        for (std::size_t K = 2; K <= 5; ++K) {
            std::vector<std::size_t> labels(n);
            for (std::size_t i = 0; i < n; ++i) labels[i] = i < K ? i : rng() % K;
            const auto a = assignment(labels, K);
            const auto m = metrics_bundle(g, b, L, a);
            CHECK(m.modularity <= 1.0);
            CHECK(m.scaled_nc > 0.0);  // connected graph: some edge is cut
            CHECK(m.scaled_median_size <= m.scaled_max_size);
            CHECK(m.scaled_max_size <= 1.0);

            std::vector<std::size_t> perm(K);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            std::shuffle(perm.begin(), perm.end(), rng);
            auto relabeled = labels;
            for (auto& c : relabeled) c = perm[c];
            const auto mr = metrics_bundle(g, b, L, assignment(relabeled, K));
            CHECK(mr.modularity == doctest::Approx(m.modularity).epsilon(1e-12));
            CHECK(mr.scaled_nc == doctest::Approx(m.scaled_nc).epsilon(1e-12));
            CHECK(mr.scaled_median_size == m.scaled_median_size);
            CHECK(mr.scaled_max_size == m.scaled_max_size);
        }
    }
}

TEST_CASE("property: spectral clustering recovers components") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto a = random_connected(8, seed);
        const auto b = random_connected(12, seed + 50);
        const auto c = random_connected(6, seed + 90);
        std::vector<Edge> edges = a.edges();
        for (auto e : b.edges()) edges.push_back({e.u + 8, e.v + 8, e.w});
        for (auto e : c.edges()) edges.push_back({e.u + 20, e.v + 20, e.w});
        const auto g = Graph::from_edges(26, edges);
        const auto labeling = connected_components(g);
        REQUIRE(labeling.count == 3);
        const auto L = build_laplacian(g, LaplacianKind::Unnormalized);
        const auto basis = extend_to(L, labeling, 3, SolverConfig{});
        const auto clusters = kmeans(basis.vectors, 3);
        CHECK(same_partition(clusters.labels, labeling.labels));
    }
}
