#pragma once

#include "lapinc/eigensolve.hpp"
#include "lapinc/graph.hpp"
#include "lapinc/linear_operator.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

namespace lapinc {

/// Lanczos vectors Q (n x Z) with fully reorthogonalized three-term recurrence.
///
/// T is stored as `alpha` (Z entries) and `beta` (Z entries): beta[k] couples
/// q_k and q_{k+1}, so beta[Z-1] is the coupling to the next, not yet
/// normalized, vector held in `pending`. A zero coupling marks a breakdown
/// restart or an exhausted space.
struct LanczosState {
    SymmetricOperator op;
    Eigen::MatrixXd Q;
    std::vector<double> alpha;
    std::vector<double> beta;
    Eigen::VectorXd pending;
    /// Directions every Lanczos vector is kept orthogonal to (may have zero columns).
    Eigen::MatrixXd locked;
    std::size_t Z_ini = 0;
    std::size_t Z_aug = 10;
    double tolerance = 0.0;
    /// Running lower bound on ||M|| from ||M q_k||.
    double norm_estimate = 0.0;
    std::size_t matvecs = 0;
    std::size_t breakdowns = 0;
    /// No further independent Lanczos vector exists.
    bool complete = false;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return alpha.size(); }
    /// Dense Z x Z tridiagonal matrix.
    Eigen::MatrixXd tridiagonal() const;
};

/// Ritz pairs of T in leading order (largest magnitude first).
struct RitzSet {
    std::vector<double> values;
    Eigen::MatrixXd U;  // Z x K
    std::vector<double> residuals;
};

/// Operator whose largest-magnitude eigenpairs are the smallest nontrivial
/// eigenpairs of L: L + shift * V_delta V_delta' - shift * I. For a connected
/// unnormalized Laplacian this is L + (s/n) 1 1' - s I.
SymmetricOperator shifted_operator(const LaplacianMatrix& L, const ComponentLabeling& labeling);

struct LanczosOptions {
    std::size_t Z_aug = 10;
    double tolerance = 0.0;
    Eigen::MatrixXd locked;
};

/// Builds Z_ini Lanczos vectors from a seeded random start (capped at the available
/// dimension; the state is then flagged complete).
LanczosState lanczos_init(const SymmetricOperator& M, std::size_t Z_ini, std::uint64_t seed,
                          LanczosOptions options = {});

/// Same, from a caller-provided start vector.
LanczosState lanczos_init_from(const SymmetricOperator& M, const Eigen::VectorXd& start,
                               std::size_t Z_ini, std::uint64_t seed, LanczosOptions options = {});

/// Appends up to Z_aug further vectors, continuing the recurrence.
void lanczos_extend(LanczosState& st, std::size_t Z_aug);

RitzSet ritz_pairs(const LanczosState& st, std::size_t K);

/// |coupling| * |bottom entry|: the Lanczos residual bound for one Ritz pair.
double ritz_residual(double coupling, double bottom_entry);

/// Residual bound of the K-th Ritz pair (1-based K); zero once the space is complete.
double ritz_residual(const LanczosState& st, const RitzSet& rs, std::size_t K);

/// Ritz vectors Q U.
Eigen::MatrixXd ritz_vectors(const LanczosState& st, const RitzSet& rs);

struct LanczosWorkEntry {
    std::size_t K = 0;
    std::size_t Z = 0;
    std::size_t iterations = 0;  // operator applications so far
    double wall_time_ms = 0.0;
    double residual = 0.0;
};

/// Lanczos method of increasing orders: one Lanczos state reused across K,
/// augmented by Z_aug vectors whenever the K-th Ritz pair misses the tolerance.
class LanczosIo {
public:
    LanczosIo(SymmetricOperator M, std::size_t Z_ini, std::size_t Z_aug, double tolerance,
              std::uint64_t seed, Eigen::MatrixXd locked = {});

    /// Computes the next order (K + 1) and returns its log entry.
    const LanczosWorkEntry& advance();

    std::size_t order() const noexcept { return K_; }
    const LanczosState& state() const noexcept { return st_; }
    const RitzSet& ritz() const noexcept { return rs_; }
    const std::vector<LanczosWorkEntry>& log() const noexcept { return log_; }
    /// True when some order was only reached by exhausting the space.
    bool exhausted() const noexcept { return exhausted_; }

private:
    LanczosState st_;
    RitzSet rs_;
    std::size_t K_ = 0;
    std::vector<LanczosWorkEntry> log_;
    bool exhausted_ = false;
};

struct LanczosIoResult {
    std::vector<double> values;  // leading order
    Eigen::MatrixXd vectors;
    std::vector<LanczosWorkEntry> log;
    bool exhausted = false;
};

/// Paper defaults: Z_ini = 20, Z_aug = 10, tolerance = eps * ||M||.
inline constexpr std::size_t default_z_ini = 20;
inline constexpr std::size_t default_z_aug = 10;
double default_lanczos_tolerance(const SymmetricOperator& M, std::uint64_t seed);

LanczosIoResult lanczos_io(const SymmetricOperator& M, std::size_t K_target,
                           std::size_t Z_ini = default_z_ini, std::size_t Z_aug = default_z_aug,
                           double tolerance = -1.0, std::uint64_t seed = 1,
                           Eigen::MatrixXd locked = {});

/// K smallest eigenpairs of L via Lanczos-IO on the shifted operator, with the
/// kernel inserted analytically.
EigenBasis lanczos_io_smallest(const LaplacianMatrix& L, const ComponentLabeling& labeling,
                               std::size_t K_target, double tolerance = -1.0,
                               std::uint64_t seed = 1);

/// From-scratch K smallest eigenpairs: a fresh Lanczos run on the shifted operator
/// grown until all K - delta wanted Ritz pairs meet cfg.tol * shift.
EigenBasis batch_smallest(const LaplacianMatrix& L, const ComponentLabeling& labeling,
                          std::size_t K, const SolverConfig& cfg);

}  // namespace lapinc
