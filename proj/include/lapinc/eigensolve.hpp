#pragma once

#include "lapinc/graph.hpp"
#include "lapinc/linear_operator.hpp"

#include "json.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lapinc {

struct Eigenpair {
    double value = 0.0;
    Eigen::VectorXd vector;
    /// Solver diagnostics: iterations spent and the final residual ||L v - value v||.
    std::size_t iterations = 0;
    double residual = 0.0;
};

/// The K smallest eigenpairs of one Laplacian, ascending.
///
/// `shift` is the deflation magnitude: the total strength s for the unnormalized
/// kind, 2 for the normalized kind. The first `delta` columns span the kernel.
struct EigenBasis {
    LaplacianKind kind = LaplacianKind::Unnormalized;
    std::vector<double> values;
    Eigen::MatrixXd vectors;
    std::size_t delta = 0;
    double strength_total = 0.0;
    double shift = 0.0;
    /// Per-column iterations and residuals (zero for the analytic kernel columns).
    std::vector<std::size_t> iterations;
    std::vector<double> residuals;

    std::size_t size() const noexcept { return values.size(); }
    std::size_t dimension() const noexcept { return static_cast<std::size_t>(vectors.rows()); }
    void append(const Eigenpair& pair);
    /// First k pairs only.
    EigenBasis truncated(std::size_t k) const;
};

enum class LeadingSolver {
    /// Plain power iteration on the deflated operator.
    Power,
    /// Lanczos with full reorthogonalization, restarted from the best Ritz vector.
    Lanczos,
};

std::string to_string(LeadingSolver solver);
LeadingSolver leading_solver_from_string(const std::string& name);

struct SolverConfig {
    /// Relative residual tolerance: stop once ||A x - theta x|| <= tol * shift.
    double tol = 1e-10;
    /// Operator applications allowed per eigenpair; 0 selects default_max_iters(n).
    std::size_t max_iters = 0;
    std::uint64_t seed = 1;
    std::size_t reorthogonalize_every = 10;
    LeadingSolver solver = LeadingSolver::Lanczos;
    /// Largest Lanczos subspace before a restart; 0 selects 300.
    std::size_t lanczos_max_basis = 0;

    void validate() const;
};

std::size_t default_max_iters(std::size_t n);

/// Component indicators (unnormalized) or S^1/2-weighted indicators (normalized),
/// unit-normalized, all with eigenvalue 0.
EigenBasis kernel_basis(const LaplacianMatrix& L, const ComponentLabeling& labeling);

/// y = L x + sum_k (shift - lambda_k) (v_k' x) v_k - shift x.
///
/// Holds references to the Laplacian and basis; both must outlive the operator.
class DeflatedOperator {
public:
    DeflatedOperator(const LaplacianMatrix& L, const EigenBasis& basis);

    std::size_t size() const noexcept { return L_->size(); }
    double shift() const noexcept { return basis_->shift; }
    const EigenBasis& basis() const noexcept { return *basis_; }
    const LaplacianMatrix& laplacian() const noexcept { return *L_; }

    void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const;
    SymmetricOperator as_operator() const;
    Eigen::MatrixXd to_dense() const;

private:
    const LaplacianMatrix* L_;
    const EigenBasis* basis_;
    Eigen::VectorXd coeff_;  // shift - lambda_k
};

Eigen::VectorXd apply_deflated(const DeflatedOperator& op, const Eigen::VectorXd& x);

struct LeadingEigenpair {
    /// Eigenvalue of the deflated operator (negative unless the spectrum is exhausted).
    double theta = 0.0;
    Eigen::VectorXd x;
    std::size_t iterations = 0;
    double residual = 0.0;
    bool converged = false;
    std::size_t restarts = 0;
};

/// Power iteration with periodic reorthogonalization against the basis. A
/// non-converged result carries the best iterate seen.
LeadingEigenpair leading_eigenpair_power(const DeflatedOperator& op, const SolverConfig& cfg);

/// Lanczos iteration locked against the basis columns, same stopping rule.
LeadingEigenpair leading_eigenpair_lanczos(const DeflatedOperator& op, const SolverConfig& cfg);

/// Flips the sign so the largest-magnitude entry is positive (near-ties go to
/// the lowest index).
void canonicalize_sign(Eigen::VectorXd& v);

/// The (K+1)-th smallest eigenpair from the K known ones. Throws ConvergenceError.
Eigenpair next_eigenpair(const LaplacianMatrix& L, const EigenBasis& basis,
                         const SolverConfig& cfg);

/// Appends next_eigenpair to `basis` in place.
void extend(const LaplacianMatrix& L, EigenBasis& basis, const SolverConfig& cfg);

/// Kernel basis followed by sequential next_eigenpair calls up to K_target pairs.
EigenBasis extend_to(const LaplacianMatrix& L, const ComponentLabeling& labeling,
                     std::size_t K_target, const SolverConfig& cfg);

struct DenseSpectrum {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // orthonormal columns
};

inline constexpr std::size_t dense_oracle_limit = 2000;

/// Full dense symmetric eigendecomposition, independent of the incremental path.
DenseSpectrum dense_oracle(const LaplacianMatrix& L);
DenseSpectrum dense_oracle(const Eigen::MatrixXd& symmetric);

/// max |V'V - I|.
double orthonormality_error(const Eigen::MatrixXd& V);

nlohmann::json to_json(const EigenBasis& basis);
EigenBasis basis_from_json(const nlohmann::json& j);

}  // namespace lapinc
