#include "doctest.h"

#include "lapinc/errors.hpp"
#include "lapinc/lanczos.hpp"
#include "lapinc/session.hpp"
#include "support.hpp"

#include <cmath>
#include <random>

using namespace lapinc;
using namespace lapinc::testing;

namespace {

void check_history(const Session& s) {
    const auto& h = s.history();
    for (std::size_t i = 0; i < h.size(); ++i) {
        CHECK(h[i].K == i + 2);
        CHECK(h[i].metrics.K == h[i].K);
        CHECK(h[i].clusters.labels.size() == s.graph().node_count());
        CHECK(h[i].solve_ms >= 0.0);
        CHECK(h[i].cluster_ms >= 0.0);
    }
    if (!h.empty()) CHECK(s.basis().size() >= h.back().K);
}

bool same_history(const Session& a, const Session& b) {
    if (a.history().size() != b.history().size()) return false;
    for (std::size_t i = 0; i < a.history().size(); ++i) {
        const auto& x = a.history()[i];
        const auto& y = b.history()[i];
        if (x.K != y.K || x.clusters.labels != y.clusters.labels || !(x.metrics == y.metrics)) {
            return false;
        }
    }
    return a.basis().values == b.basis().values && a.basis().vectors == b.basis().vectors;
}

}  // namespace

TEST_CASE("create: normalized weights and Laplacian") {
    Session s(single_edge(4.0), SessionConfig{});
    CHECK(s.normalized_graph().weight(0, 1) == doctest::Approx(1.0));
    Eigen::Matrix2d e;
    e << 1, -1, -1, 1;
    CHECK((s.laplacian().matrix.to_dense() - e).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(s.laplacian().strengths.total == doctest::Approx(2.0));
    CHECK(s.basis().size() == 1);
    CHECK(s.status() == SessionStatus::Running);
    CHECK(s.warnings().empty());

    Session p(path3(), SessionConfig{});
    CHECK(p.laplacian().strengths.total == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-15));

    Session d(two_edges(), SessionConfig{});
    CHECK(d.basis().delta == 2);
    CHECK(d.warnings().size() == 1);
}

TEST_CASE("step on two triangles") {
    Session s(two_triangles(), SessionConfig{});
    const auto& e = s.step();
    CHECK(e.K == 2);
    CHECK(e.metrics.modularity == doctest::Approx(0.5));
    CHECK(e.metrics.scaled_nc == 0.0);
    CHECK(e.metrics.scaled_median_size == 0.5);
    CHECK(e.metrics.scaled_max_size == 0.5);
    CHECK(e.metrics.scaled_spectrum_energy == 0.0);
    const auto csv = s.labels_csv();
    CHECK(csv == "node,cluster\n0,0\n1,0\n2,0\n3,1\n4,1\n5,1\n");
}

TEST_CASE("P3 session matches the dense oracle of L(W_N)") {
    Session s(path3(), SessionConfig{});
    s.step();
    s.step();
    const auto oracle = dense_oracle(s.laplacian());
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(s.basis().values[i] - oracle.values(static_cast<Eigen::Index>(i))) <= 1e-8);
    }
    CHECK_THROWS_AS(s.step(), StateError);  // spectrum exhausted at K = n
    CHECK(s.status() == SessionStatus::Running);
}

TEST_CASE("stop semantics") {
    Session s(random_connected(20, 3), SessionConfig{});
    CHECK_THROWS_AS(s.stop(), StateError);
    s.step();
    s.step();
    s.step();
    const auto report = s.stop();
    CHECK(report.K == 4);
    REQUIRE(report.history.size() == 3);
    CHECK(report.history[0].K == 2);
    CHECK(report.history[2].K == 4);
    CHECK(s.status() == SessionStatus::Stopped);
    CHECK_THROWS_AS(s.stop(), StateError);
    CHECK_THROWS_AS(s.step(), StateError);
    CHECK(s.history().size() == 3);
}

TEST_CASE("k_max cap") {
    SessionConfig cfg;
    cfg.k_max = 3;
    Session s(random_connected(15, 1), cfg);
    s.step();
    s.step();
    CHECK_THROWS_AS(s.step(), StateError);
    cfg.k_max = 1;
    CHECK_THROWS_AS(Session(random_connected(15, 1), cfg), PreconditionError);
}

TEST_CASE("solver failure marks the session failed and keeps history") {
    SessionConfig cfg;
    cfg.solver.solver = LeadingSolver::Power;
    cfg.solver.max_iters = 2;
    cfg.solver.tol = 1e-14;
    Session s(random_connected(40, 7), cfg);
    CHECK_THROWS_AS(s.step(), ConvergenceError);
    CHECK(s.status() == SessionStatus::Failed);
    CHECK_FALSE(s.failure().empty());
    CHECK(s.history().empty());
    CHECK_THROWS_AS(s.step(), StateError);
}

TEST_CASE("exports") {
    Session s(two_triangles(), SessionConfig{});
    CHECK_THROWS_AS(s.metrics_csv(), StateError);
    CHECK_THROWS_AS(s.labels_csv(), StateError);
    s.step();
    s.step();
    const auto csv = s.metrics_csv();
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
    CHECK(csv.rfind(metrics_csv_header() + "\n", 0) == 0);
    const auto j = s.metrics_json();
    REQUIRE(j.size() == 2);
    CHECK(metrics_from_json(j[1]) == s.history()[1].metrics);
    const auto labels = s.labels_csv(2);
    CHECK(std::count(labels.begin(), labels.end(), '\n') == 7);
    CHECK_THROWS_AS(s.labels_csv(9), PreconditionError);
}

TEST_CASE("checkpoint round-trips exactly and resumes identically") {
    SessionConfig cfg;
    cfg.kind = LaplacianKind::Normalized;
    cfg.solver.seed = 77;
    Session s(random_connected(40, 12), cfg, "abc");
    s.step();
    s.step();
    const auto cp = s.checkpoint();
    auto r = Session::resume(nlohmann::json::parse(cp.dump()));
    CHECK(r.checkpoint() == cp);
    CHECK(r.id() == "abc");
    CHECK(same_history(s, r));
    s.step();
    r.step();
    CHECK(same_history(s, r));
    CHECK_THROWS_AS(Session::resume(nlohmann::json{{"format", "x"}}), ParseError);
}

TEST_CASE("config JSON") {
    SessionConfig cfg;
    cfg.kind = LaplacianKind::Normalized;
    cfg.metrics_on = MetricGraph::Normalized;
    cfg.k_max = 9;
    cfg.kmeans.restarts = 3;
    const auto back = session_config_from_json(to_json(cfg));
    CHECK(to_json(back) == to_json(cfg));
    CHECK_THROWS_AS(session_config_from_json(nlohmann::json{{"kind", "weird"}}), PreconditionError);
    CHECK_THROWS_AS(session_config_from_json(nlohmann::json{{"solver", {{"tol", -1.0}}}}),
                    PreconditionError);
    CHECK_THROWS_AS(session_config_from_json(nlohmann::json{{"kind", 3}}), PreconditionError);
}

TEST_CASE("property: random operation sequences keep the history invariants") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 12; ++trial) {
        const auto g = random_connected(12 + rng() % 20, rng());
        SessionConfig cfg;
        cfg.kind = trial % 2 ? LaplacianKind::Normalized : LaplacianKind::Unnormalized;
        Session s(g, cfg);
        Session replay(g, cfg);
        for (int op = 0; op < 10; ++op) {
            const auto before = s.history().size();
            const auto choice = rng() % 5;
            try {
                if (choice < 4) {
                    s.step();
                    replay.step();
                } else {
                    s.stop();
                }
            } catch (const StateError&) {
                CHECK(s.history().size() == before);
            }
            check_history(s);
        }
        // replay reaches the same K with the same results
        while (replay.history().size() < s.history().size()) replay.step();
        CHECK(same_history(s, replay));

        // incremental basis equals the batch basis
        if (!s.history().empty()) {
            const std::size_t K = s.history().back().K;
            const auto batch = batch_smallest(s.laplacian(), connected_components(s.normalized_graph()),
                                              K, SolverConfig{});
            for (std::size_t i = 0; i < K; ++i) {
                CHECK(std::abs(batch.values[i] - s.basis().values[i]) <=
                      1e-7 * s.laplacian().strengths.total);
            }
        }
    }
}
