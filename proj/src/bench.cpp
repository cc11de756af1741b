#include "lapinc/bench.hpp"

#include "lapinc/eigensolve.hpp"
#include "lapinc/errors.hpp"
#include "lapinc/lanczos.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

namespace lapinc {

namespace {

using clock_type = std::chrono::steady_clock;

double ms_since(clock_type::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock_type::now() - t0).count();
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void check_method(const std::string& m) {
    if (std::find(bench_methods.begin(), bench_methods.end(), m) == bench_methods.end()) {
        throw PreconditionError("unknown bench method '" + m +
                                "' (expected incremental_io, lanczos_io or batch)");
    }
}

EigenBasis smallest_by(const std::string& method, const LaplacianMatrix& L,
                       const ComponentLabeling& labeling, std::size_t K, std::uint64_t seed) {
    SolverConfig cfg;
    cfg.seed = seed;
    if (method == "incremental_io") return extend_to(L, labeling, K, cfg);
    if (method == "lanczos_io") return lanczos_io_smallest(L, labeling, K, -1.0, seed);
    return batch_smallest(L, labeling, K, cfg);
}

}  // namespace

void BenchOptions::validate() const {
    if (ns.empty()) throw PreconditionError("bench needs at least one n");
    for (const auto n : ns) {
        if (n < 3) throw PreconditionError("bench graph size must be at least 3");
        if (k_max > n) throw PreconditionError("k_max exceeds bench graph size");
    }
    if (!(p > 0.0 && p <= 1.0)) throw PreconditionError("edge probability must be in (0, 1]");
    if (k_max < 2) throw PreconditionError("k_max must be at least 2");
    if (trials == 0) throw PreconditionError("trials must be positive");
    if (methods.empty()) throw PreconditionError("bench needs at least one method");
    for (const auto& m : methods) check_method(m);
}

bool BenchResult::audits_passed() const {
    return std::all_of(audits.begin(), audits.end(), [](const AuditResult& a) { return a.passed; });
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t n, std::size_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(trial)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

std::vector<BenchRecord> time_method(const std::string& method, const LaplacianMatrix& L,
                                     const ComponentLabeling& labeling, std::size_t k_max,
                                     std::uint64_t seed) {
    check_method(method);
    if (k_max < 2 || k_max > L.size()) throw PreconditionError("k_max out of range");
    std::vector<BenchRecord> out;
    double cumulative = 0.0;
    auto record = [&](std::size_t K, double ms, double residual) {
        cumulative += ms;
        BenchRecord r;
        r.method = method;
        r.n = L.size();
        r.K = K;
        r.wall_time_ms = ms;
        r.cumulative_ms = cumulative;
        r.residual = residual;
        out.push_back(r);
    };

    if (method == "incremental_io") {
        SolverConfig cfg;
        cfg.seed = seed;
        auto t0 = clock_type::now();
        EigenBasis basis = kernel_basis(L, labeling);
        for (std::size_t K = 2; K <= k_max; ++K) {
            while (basis.size() < K) extend(L, basis, cfg);
            record(K, ms_since(t0), basis.residuals[K - 1]);
            t0 = clock_type::now();
        }
    } else if (method == "lanczos_io") {
        auto t0 = clock_type::now();
        const EigenBasis kernel = kernel_basis(L, labeling);
        const auto M = shifted_operator(L, labeling);
        LanczosIo io(M, default_z_ini, default_z_aug, default_lanczos_tolerance(M, seed), seed,
                     kernel.vectors);
        for (std::size_t K = 2; K <= k_max; ++K) {
            double residual = 0.0;
            while (kernel.delta + io.order() < K) residual = io.advance().residual;
            record(K, ms_since(t0), residual);
            t0 = clock_type::now();
        }
    } else {
        SolverConfig cfg;
        cfg.seed = seed;
        for (std::size_t K = 2; K <= k_max; ++K) {
            const auto t0 = clock_type::now();
            const EigenBasis basis = batch_smallest(L, labeling, K, cfg);
            const double ms = ms_since(t0);
            record(K, ms, *std::max_element(basis.residuals.begin(), basis.residuals.end()));
        }
    }
    return out;
}

AuditResult audit_methods(const Graph& g, LaplacianKind kind, std::size_t k_max,
                          const std::vector<std::string>& methods, std::uint64_t seed) {
    const auto L = build_laplacian(g, kind);
    const auto labeling = connected_components(g);
    AuditResult a;
    a.n = g.node_count();
    a.seed = seed;
    a.strength_total = L.strengths.total;
    const double bound = 1e-7 * a.strength_total;

    std::vector<std::vector<double>> values;
    nlohmann::json per_method = nlohmann::json::object();
    for (const auto& m : methods) {
        values.push_back(smallest_by(m, L, labeling, k_max, seed).values);
        per_method[m] = values.back();
    }
    for (std::size_t i = 1; i < values.size(); ++i) {
        for (std::size_t k = 0; k < k_max; ++k) {
            a.max_difference = std::max(a.max_difference, std::abs(values[i][k] - values[0][k]));
        }
    }
    a.passed = a.max_difference <= bound;
    if (!a.passed) {
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& e : g.edges()) edges.push_back({e.u, e.v, e.w});
        a.forensic = {{"n", a.n},
                      {"seed", seed},
                      {"kind", to_string(kind)},
                      {"k_max", k_max},
                      {"strength_total", a.strength_total},
                      {"bound", bound},
                      {"max_difference", a.max_difference},
                      {"values", per_method},
                      {"edges", edges}};
    }
    return a;
}

BenchResult run_bench(const BenchOptions& options) {
    options.validate();
    BenchResult result;
    for (const auto n : options.ns) {
        bool warmed = !options.warmup;
        for (std::size_t trial = 0; trial < options.trials; ++trial) {
            const auto seed = trial_seed(options.seed, n, trial);
            const auto gen = generate_erdos_renyi(n, options.p, seed);
            if (gen.largest_component_fallback) {
                result.notes.push_back("n=" + std::to_string(n) + " trial " +
                                       std::to_string(trial) +
                                       ": no connected sample, using the largest component (" +
                                       std::to_string(gen.graph.node_count()) + " nodes)");
            }
            const auto L = build_laplacian(gen.graph, options.kind);
            const auto labeling = connected_components(gen.graph);
            const std::size_t k_max = std::min(options.k_max, L.size());
            if (!warmed) {
                for (const auto& m : options.methods) time_method(m, L, labeling, k_max, seed);
                warmed = true;
            }
            for (const auto& m : options.methods) {
                for (auto r : time_method(m, L, labeling, k_max, seed)) {
                    r.p = options.p;
                    r.trial = trial;
                    r.seed = seed;
                    result.records.push_back(std::move(r));
                }
            }
            if (options.audit && trial == 0) {
                result.audits.push_back(
                    audit_methods(gen.graph, options.kind, k_max, options.methods, seed));
            }
        }
    }
    return result;
}

std::string bench_csv_header() {
    return "method,n,p,K,wall_time_ms,cumulative_ms,residual,trial,seed";
}

std::string to_csv_row(const BenchRecord& r) {
    return r.method + ',' + std::to_string(r.n) + ',' + fmt17(r.p) + ',' + std::to_string(r.K) +
           ',' + fmt17(r.wall_time_ms) + ',' + fmt17(r.cumulative_ms) + ',' + fmt17(r.residual) +
           ',' + std::to_string(r.trial) + ',' + std::to_string(r.seed);
}

std::string bench_summary(const std::vector<BenchRecord>& records) {
    std::map<std::tuple<std::string, std::size_t, std::size_t>, std::vector<double>> groups;
    for (const auto& r : records) groups[{r.method, r.n, r.K}].push_back(r.cumulative_ms);
    std::ostringstream out;
    out << "method          n       K   cumulative_ms (mean +- sd)\n";
    for (const auto& [key, xs] : groups) {
        double mean = 0.0;
        for (const auto x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0.0;
        for (const auto x : xs) var += (x - mean) * (x - mean);
        const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
        char line[160];
        std::snprintf(line, sizeof line, "%-15s %-7zu %-3zu %12.3f +- %.3f\n",
                      std::get<0>(key).c_str(), std::get<1>(key), std::get<2>(key), mean, sd);
        out << line;
    }
    return out.str();
}

}  // namespace lapinc
