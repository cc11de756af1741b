#pragma once

#include "lapinc/graph.hpp"

#include "json.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lapinc {

inline const std::vector<std::string> bench_methods = {"incremental_io", "lanczos_io", "batch"};

struct BenchOptions {
    std::vector<std::size_t> ns{500};
    double p = 0.1;
    std::size_t k_max = 10;
    std::size_t trials = 5;
    std::vector<std::string> methods = bench_methods;
    std::uint64_t seed = 1;
    LaplacianKind kind = LaplacianKind::Unnormalized;
    /// One discarded run per (method, n) before timing.
    bool warmup = true;
    /// Cross-method eigenvalue check on the first trial of every n.
    bool audit = true;

    void validate() const;
};

struct BenchRecord {
    std::string method;
    std::size_t n = 0;
    double p = 0.0;
    std::size_t K = 0;
    double wall_time_ms = 0.0;
    double cumulative_ms = 0.0;
    double residual = 0.0;
    std::size_t trial = 0;
    std::uint64_t seed = 0;
};

struct AuditResult {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double strength_total = 0.0;
    double max_difference = 0.0;
    bool passed = true;
    /// Graph and per-method eigenvalues, written out when the audit fails.
    nlohmann::json forensic;
};

struct BenchResult {
    std::vector<BenchRecord> records;
    std::vector<AuditResult> audits;
    std::vector<std::string> notes;

    bool audits_passed() const;
};

/// Per-K timings for one method on one Laplacian, K = 2..k_max. Runs sequentially.
std::vector<BenchRecord> time_method(const std::string& method, const LaplacianMatrix& L,
                                     const ComponentLabeling& labeling, std::size_t k_max,
                                     std::uint64_t seed);

/// Eigenvalues of all listed methods at k_max, checked against each other within 1e-7 * s.
AuditResult audit_methods(const Graph& g, LaplacianKind kind, std::size_t k_max,
                          const std::vector<std::string>& methods, std::uint64_t seed);

BenchResult run_bench(const BenchOptions& options);

/// Trial graph seed, shared by all methods of the trial.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t n, std::size_t trial);

std::string bench_csv_header();
std::string to_csv_row(const BenchRecord& r);

/// mean +- sd of cumulative_ms per (method, n, K).
std::string bench_summary(const std::vector<BenchRecord>& records);

}  // namespace lapinc
