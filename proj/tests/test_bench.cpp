#include "doctest.h"

#include "lapinc/bench.hpp"
#include "lapinc/errors.hpp"
#include "support.hpp"

#include <map>
#include <set>

using namespace lapinc;

TEST_CASE("sweep size and record invariants") {
    BenchOptions o;
    o.ns = {60};
    o.p = 0.2;
    o.k_max = 10;
    o.trials = 3;
    const auto r = run_bench(o);
    CHECK(r.records.size() == 3 * 9 * 3);
    CHECK(r.audits.size() == 1);
    CHECK(r.audits_passed());

    std::map<std::pair<std::string, std::size_t>, double> last;
    std::map<std::size_t, std::set<std::uint64_t>> seeds;
    for (const auto& rec : r.records) {
        CHECK(rec.wall_time_ms >= 0.0);
        CHECK(rec.K >= 2);
        CHECK(rec.K <= 10);
        CHECK(rec.p == 0.2);
        const auto key = std::make_pair(rec.method, rec.trial);
        if (rec.K > 2) CHECK(rec.cumulative_ms >= last[key]);
        last[key] = rec.cumulative_ms;
        seeds[rec.trial].insert(rec.seed);
    }
    // one graph per trial, shared by every method
    for (const auto& [trial, s] : seeds) CHECK(s.size() == 1);
    CHECK(seeds.size() == 3);

    const auto summary = bench_summary(r.records);
    CHECK(summary.find("incremental_io") != std::string::npos);
    CHECK(summary.find("+-") != std::string::npos);
}

TEST_CASE("csv schema") {
    CHECK(bench_csv_header() == "method,n,p,K,wall_time_ms,cumulative_ms,residual,trial,seed");
    BenchRecord r;
    r.method = "batch";
    r.n = 10;
    r.p = 0.5;
    r.K = 3;
    r.wall_time_ms = 1.5;
    r.cumulative_ms = 2.5;
    r.residual = 0.0;
    r.trial = 1;
    r.seed = 9;
    CHECK(to_csv_row(r) == "batch,10,0.5,3,1.5,2.5,0,1,9");
}

TEST_CASE("option validation") {
    BenchOptions o;
    o.methods = {"magic"};
    CHECK_THROWS_AS(run_bench(o), PreconditionError);
    o = BenchOptions{};
    o.k_max = 1;
    CHECK_THROWS_AS(run_bench(o), PreconditionError);
    o = BenchOptions{};
    o.p = 0.0;
    CHECK_THROWS_AS(run_bench(o), PreconditionError);
    o = BenchOptions{};
    o.ns = {5};
    CHECK_THROWS_AS(run_bench(o), PreconditionError);
}

TEST_CASE("audit agrees on a random graph and reports the difference") {
    const auto g = lapinc::testing::random_connected(80, 5);
    for (const auto kind : {LaplacianKind::Unnormalized, LaplacianKind::Normalized}) {
        const auto a = audit_methods(g, kind, 8, bench_methods, 3);
        CHECK(a.passed);
        CHECK(a.max_difference <= 1e-7 * a.strength_total);
        CHECK(a.forensic.is_null());
    }
}

TEST_CASE("trial seeds differ across n and trial") {
    CHECK(trial_seed(1, 100, 0) != trial_seed(1, 100, 1));
    CHECK(trial_seed(1, 100, 0) != trial_seed(1, 200, 0));
    CHECK(trial_seed(1, 100, 0) == trial_seed(1, 100, 0));
}
