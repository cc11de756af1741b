// lapinc command-line front end: solve, cluster, bench, serve.

#include "lapinc/bench.hpp"
#include "lapinc/eigensolve.hpp"
#include "lapinc/errors.hpp"
#include "lapinc/lanczos.hpp"
#include "lapinc/server.hpp"
#include "lapinc/session.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

namespace {

using namespace lapinc;

enum ExitCode { ok = 0, parse_failure = 1, precondition_failure = 2, convergence_failure = 3,
                audit_failure = 4 };

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PreconditionError("cannot write '" + path + "'");
    out << text;
}

// Fixed-point output for the human summary; tiny values print as exact zero.
std::string fixed10(double v) {
    if (std::abs(v) < 5e-11) v = 0.0;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.10f", v);
    return buf;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", v);
    return buf;
}

std::string method_name(const std::string& m) {
    if (m == "inc" || m == "incremental" || m == "incremental_io") return "incremental_io";
    if (m == "lanczos" || m == "lanczos_io") return "lanczos_io";
    if (m == "batch") return "batch";
    throw PreconditionError("unknown method '" + m + "'");
}

struct SolveArgs {
    std::string graph;
    std::string kind = "unnormalized";
    std::size_t k = 2;
    std::string method = "inc";
    std::string solver = "lanczos";
    double tol = 1e-10;
    std::size_t max_iters = 0;
    std::uint64_t seed = 1;
    std::string out;
};

int run_solve(const SolveArgs& a) {
    const Graph g = load_graph_file(a.graph);
    const auto kind = laplacian_kind_from_string(a.kind);
    const auto method = method_name(a.method);
    SolverConfig cfg;
    cfg.tol = a.tol;
    cfg.seed = a.seed;
    cfg.max_iters = a.max_iters;
    cfg.solver = leading_solver_from_string(a.solver);
    cfg.validate();
    if (a.k < 1 || a.k > g.node_count()) {
        throw PreconditionError("--k must be between 1 and n = " + std::to_string(g.node_count()));
    }
    const auto L = build_laplacian(g, kind);
    const auto labeling = connected_components(g);
    EigenBasis basis;
    if (method == "incremental_io") {
        basis = extend_to(L, labeling, a.k, cfg);
    } else if (method == "lanczos_io") {
        basis = lanczos_io_smallest(L, labeling, a.k, -1.0, a.seed);
    } else {
        basis = batch_smallest(L, labeling, a.k, cfg);
    }
    if (!a.out.empty()) write_file(a.out, to_json(basis).dump(2) + "\n");

    std::cout << "method " << method << ", kind " << to_string(kind) << ", n " << g.node_count()
              << ", components " << basis.delta << "\n";
    std::cout << "index\tvalue\tresidual\titerations\n";
    for (std::size_t i = 0; i < basis.size(); ++i) {
        std::cout << i + 1 << '\t' << fixed10(basis.values[i]) << '\t' << sci(basis.residuals[i])
                  << '\t' << basis.iterations[i] << '\n';
    }
    return ok;
}

struct ClusterArgs {
    std::string graph;
    std::string kind = "unnormalized";
    std::size_t k = 2;
    std::string solver = "lanczos";
    double tol = 1e-10;
    std::uint64_t seed = 1;
    std::string metrics_on = "w";
    std::string labels_out = "labels.csv";
    std::string metrics_out = "metrics.csv";
    std::string checkpoint_out;
};

int run_cluster(const ClusterArgs& a) {
    if (a.k < 2) throw PreconditionError("--k must be at least 2");
    Graph g = load_graph_file(a.graph);
    if (a.k > g.node_count()) {
        throw PreconditionError("--k exceeds n = " + std::to_string(g.node_count()));
    }
    SessionConfig cfg;
    cfg.kind = laplacian_kind_from_string(a.kind);
    cfg.solver.tol = a.tol;
    cfg.solver.seed = a.seed;
    cfg.solver.solver = leading_solver_from_string(a.solver);
    cfg.kmeans.seed = a.seed;
    cfg.metrics_on = metric_graph_from_string(a.metrics_on);
    Session session(std::move(g), cfg);
    for (const auto& w : session.warnings()) std::cerr << "warning: " << w << "\n";
    while (session.current_k() < a.k) session.step();
    const auto report = session.stop();

    write_file(a.labels_out, session.labels_csv());
    write_file(a.metrics_out, session.metrics_csv());
    if (!a.checkpoint_out.empty()) {
        write_file(a.checkpoint_out, session.checkpoint().dump() + "\n");
    }
    std::cout << metrics_csv_header() << "\n";
    for (const auto& e : report.history) std::cout << to_csv_row(e.metrics) << "\n";
    return ok;
}

struct BenchArgs {
    std::vector<std::size_t> ns{500};
    double p = 0.1;
    std::size_t kmax = 10;
    std::size_t trials = 5;
    std::vector<std::string> methods{"incremental_io", "lanczos_io", "batch"};
    std::uint64_t seed = 1;
    std::string kind = "unnormalized";
    std::string out = "bench.csv";
    bool no_warmup = false;
};

int run_bench_cmd(const BenchArgs& a) {
    BenchOptions o;
    o.ns = a.ns;
    o.p = a.p;
    o.k_max = a.kmax;
    o.trials = a.trials;
    o.methods.clear();
    for (const auto& m : a.methods) o.methods.push_back(method_name(m));
    o.seed = a.seed;
    o.kind = laplacian_kind_from_string(a.kind);
    o.warmup = !a.no_warmup;
    const auto result = run_bench(o);

    std::string csv = bench_csv_header() + "\n";
    for (const auto& r : result.records) csv += to_csv_row(r) + "\n";
    write_file(a.out, csv);
    for (const auto& note : result.notes) std::cerr << "note: " << note << "\n";
    std::cout << result.records.size() << " records written to " << a.out << "\n";
    std::cout << bench_summary(result.records);

    int code = ok;
    for (const auto& audit : result.audits) {
        std::cout << "audit n=" << audit.n << ": max eigenvalue difference "
                  << sci(audit.max_difference) << " (bound " << sci(1e-7 * audit.strength_total)
                  << ") " << (audit.passed ? "ok" : "FAILED") << "\n";
        if (!audit.passed) {
            const auto dump = a.out + ".audit-n" + std::to_string(audit.n) + ".json";
            write_file(dump, audit.forensic.dump(2) + "\n");
            std::cerr << "audit failed; forensic dump written to " << dump << "\n";
            code = audit_failure;
        }
    }
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Incremental spectral clustering: eigensolvers, sessions, benchmarks and API"};
    app.require_subcommand(1);

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "K smallest Laplacian eigenpairs of a graph file");
    s->add_option("graph", solve.graph, "edge list or MatrixMarket (.mtx) file")->required();
    s->add_option("--kind", solve.kind, "unnormalized or normalized")->capture_default_str();
    s->add_option("--k", solve.k, "number of eigenpairs")->required();
    s->add_option("--method", solve.method, "inc, lanczos or batch")->capture_default_str();
    s->add_option("--solver", solve.solver, "leading-pair solver for inc: lanczos or power")
        ->capture_default_str();
    s->add_option("--tol", solve.tol, "relative residual tolerance")->capture_default_str();
    s->add_option("--max-iters", solve.max_iters, "operator applications per pair (0: automatic)")
        ->capture_default_str();
    s->add_option("--seed", solve.seed)->capture_default_str();
    s->add_option("--out", solve.out, "write the eigenbasis as JSON");

    ClusterArgs cluster;
    auto* c = app.add_subcommand("cluster", "incremental spectral clustering up to K clusters");
    c->add_option("graph", cluster.graph, "edge list or MatrixMarket (.mtx) file")->required();
    c->add_option("--kind", cluster.kind)->capture_default_str();
    c->add_option("--k", cluster.k, "final number of clusters (>= 2)")->required();
    c->add_option("--solver", cluster.solver)->capture_default_str();
    c->add_option("--tol", cluster.tol)->capture_default_str();
    c->add_option("--seed", cluster.seed)->capture_default_str();
    c->add_option("--metrics-on", cluster.metrics_on, "w (original) or wn (normalized weights)")
        ->capture_default_str();
    c->add_option("--labels", cluster.labels_out, "labels CSV path")->capture_default_str();
    c->add_option("--metrics", cluster.metrics_out, "metrics CSV path")->capture_default_str();
    c->add_option("--checkpoint", cluster.checkpoint_out, "session checkpoint JSON path");

    BenchArgs bench;
    auto* b = app.add_subcommand("bench", "timing sweep on Erdos-Renyi graphs");
    b->add_option("--n", bench.ns, "graph sizes")->delimiter(',')->capture_default_str();
    b->add_option("--p", bench.p, "edge probability")->capture_default_str();
    b->add_option("--kmax", bench.kmax)->capture_default_str();
    b->add_option("--trials", bench.trials)->capture_default_str();
    b->add_option("--methods", bench.methods, "incremental_io, lanczos_io, batch")
        ->delimiter(',')
        ->capture_default_str();
    b->add_option("--seed", bench.seed)->capture_default_str();
    b->add_option("--kind", bench.kind)->capture_default_str();
    b->add_option("--out", bench.out, "records CSV path")->capture_default_str();
    b->add_flag("--no-warmup", bench.no_warmup, "skip the discarded warm-up run");

    ServerOptions serve;
    auto* v = app.add_subcommand("serve", "HTTP API under /v1");
    std::optional<int> port;
    std::optional<std::string> data_dir;
    v->add_option("--port", port, "default: LAPINC_PORT or 8080");
    v->add_option("--host", serve.host)->capture_default_str();
    v->add_option("--data-dir", data_dir, "default: LAPINC_DATA_DIR");
    v->add_option("--max-upload", serve.max_upload_bytes, "bytes")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return parse_failure;
    }

    try {
        if (*s) return run_solve(solve);
        if (*c) return run_cluster(cluster);
        if (*b) return run_bench_cmd(bench);
        auto env = ServerOptions::from_environment();
        env.host = serve.host;
        env.max_upload_bytes = serve.max_upload_bytes;
        if (port) env.port = *port;
        if (data_dir) env.data_dir = *data_dir;
        std::cerr << "listening on " << env.host << ":" << env.port << "\n";
        return run_server(env);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return parse_failure;
    } catch (const ConvergenceError& e) {
        std::cerr << "convergence failure: " << e.what() << " (iterations " << e.iterations()
                  << ", residual " << sci(e.residual()) << ")\n";
        return convergence_failure;
    } catch (const PreconditionError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return precondition_failure;
    } catch (const StateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return precondition_failure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return parse_failure;
    }
}
