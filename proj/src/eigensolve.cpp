#include "lapinc/eigensolve.hpp"

#include "lapinc/errors.hpp"
#include "lapinc/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace lapinc {

namespace {

Eigen::VectorXd random_unit(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    for (auto& v : x) v = normal(rng);
    return x / x.norm();
}

// x <- x - V V' x, applied twice.
void project_out(const Eigen::MatrixXd& V, Eigen::VectorXd& x) {
    if (V.cols() == 0) return;
    for (int pass = 0; pass < 2; ++pass) x.noalias() -= V * (V.transpose() * x);
}

void check_basis_for(const LaplacianMatrix& L, const EigenBasis& basis) {
    if (basis.dimension() != L.size()) {
        throw PreconditionError("basis dimension " + std::to_string(basis.dimension()) +
                                " does not match Laplacian size " + std::to_string(L.size()));
    }
    if (basis.kind != L.kind) throw PreconditionError("basis and Laplacian kinds differ");
}

}  // namespace

// ---------------------------------------------------------------------------

void EigenBasis::append(const Eigenpair& pair) {
    if (vectors.cols() > 0 && pair.vector.size() != vectors.rows()) {
        throw PreconditionError("eigenvector length does not match basis");
    }
    const Eigen::Index k = vectors.cols();
    vectors.conservativeResize(pair.vector.size(), k + 1);
    vectors.col(k) = pair.vector;
    values.push_back(pair.value);
    iterations.push_back(pair.iterations);
    residuals.push_back(pair.residual);
}

EigenBasis EigenBasis::truncated(std::size_t k) const {
    if (k > size()) throw PreconditionError("cannot truncate basis to more columns than it has");
    EigenBasis out = *this;
    out.values.resize(k);
    out.iterations.resize(k);
    out.residuals.resize(k);
    out.vectors = vectors.leftCols(static_cast<Eigen::Index>(k));
    out.delta = std::min(delta, k);
    return out;
}

std::string to_string(LeadingSolver solver) {
    return solver == LeadingSolver::Power ? "power" : "lanczos";
}

LeadingSolver leading_solver_from_string(const std::string& name) {
    if (name == "power") return LeadingSolver::Power;
    if (name == "lanczos") return LeadingSolver::Lanczos;
    throw PreconditionError("unknown leading-eigenpair solver '" + name + "'");
}

void SolverConfig::validate() const {
    if (!(tol > 0.0)) throw PreconditionError("solver tolerance must be positive");
    if (reorthogonalize_every == 0) throw PreconditionError("reorthogonalize_every must be >= 1");
}

std::size_t default_max_iters(std::size_t n) {
    const double ln = std::log(static_cast<double>(std::max<std::size_t>(n, 2)));
    return 10 * static_cast<std::size_t>(std::ceil(ln * ln)) + 2'000'000;
}

// ---------------------------------------------------------------------------

EigenBasis kernel_basis(const LaplacianMatrix& L, const ComponentLabeling& labeling) {
    const std::size_t n = L.size();
    if (labeling.labels.size() != n) {
        throw PreconditionError("component labeling does not match Laplacian size");
    }
    EigenBasis basis;
    basis.kind = L.kind;
    basis.delta = labeling.count;
    basis.strength_total = L.strengths.total;
    basis.shift = L.kind == LaplacianKind::Normalized ? 2.0 : L.strengths.total;
    basis.vectors = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                          static_cast<Eigen::Index>(labeling.count));
    for (std::size_t i = 0; i < n; ++i) {
        const double entry =
            L.kind == LaplacianKind::Normalized ? std::sqrt(L.strengths.node[i]) : 1.0;
        basis.vectors(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(labeling.labels[i])) =
            entry;
    }
    for (Eigen::Index c = 0; c < basis.vectors.cols(); ++c) basis.vectors.col(c).normalize();
    basis.values.assign(labeling.count, 0.0);
    basis.iterations.assign(labeling.count, 0);
    basis.residuals.assign(labeling.count, 0.0);
    return basis;
}

// ---------------------------------------------------------------------------

DeflatedOperator::DeflatedOperator(const LaplacianMatrix& L, const EigenBasis& basis)
    : L_(&L), basis_(&basis) {
    check_basis_for(L, basis);
    coeff_.resize(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t k = 0; k < basis.size(); ++k) {
        coeff_[static_cast<Eigen::Index>(k)] = basis.shift - basis.values[k];
    }
}

void DeflatedOperator::apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const {
    if (static_cast<std::size_t>(x.size()) != size()) {
        throw PreconditionError("dimension mismatch: operator size " + std::to_string(size()) +
                                ", vector length " + std::to_string(x.size()));
    }
    L_->multiply(x, y);
    if (coeff_.size() > 0) {
        const Eigen::VectorXd c = basis_->vectors.transpose() * x;
        y.noalias() += basis_->vectors * coeff_.cwiseProduct(c);
    }
    y.noalias() -= basis_->shift * x;
}

SymmetricOperator DeflatedOperator::as_operator() const {
    SymmetricOperator op;
    op.n = size();
    op.apply = [this](const Eigen::VectorXd& x, Eigen::VectorXd& y) { apply(x, y); };
    return op;
}

Eigen::MatrixXd DeflatedOperator::to_dense() const { return as_operator().to_dense(); }

Eigen::VectorXd apply_deflated(const DeflatedOperator& op, const Eigen::VectorXd& x) {
    Eigen::VectorXd y;
    op.apply(x, y);
    return y;
}

// ---------------------------------------------------------------------------

LeadingEigenpair leading_eigenpair_power(const DeflatedOperator& op, const SolverConfig& cfg) {
    cfg.validate();
    const std::size_t n = op.size();
    const auto& V = op.basis().vectors;
    if (op.basis().size() >= n) {
        throw PreconditionError("no undeflated direction left (K = n)");
    }
    const std::size_t max_iters = cfg.max_iters ? cfg.max_iters : default_max_iters(n);
    const double threshold = cfg.tol * op.shift();
    constexpr std::size_t max_restarts = 5;

    std::mt19937_64 rng(cfg.seed);
    LeadingEigenpair best;
    best.residual = std::numeric_limits<double>::infinity();

    auto fresh_start = [&](LeadingEigenpair& state) {
        for (;;) {
            Eigen::VectorXd x = random_unit(n, rng);
            project_out(V, x);
            const double norm = x.norm();
            if (norm > 1e-8) return Eigen::VectorXd(x / norm);
            if (++state.restarts > max_restarts) {
                throw ConvergenceError("start vector lies in the deflated span", state.iterations,
                                       state.residual, op.basis().size());
            }
        }
    };

    LeadingEigenpair cur;
    Eigen::VectorXd x = fresh_start(cur);
    Eigen::VectorXd y;
    for (std::size_t it = 1; it <= max_iters; ++it) {
        op.apply(x, y);
        const double theta = x.dot(y);
        const double residual = (y - theta * x).norm();
        cur.iterations = it;
        if (residual < best.residual) {
            best.theta = theta;
            best.x = x;
            best.residual = residual;
        }
        if (residual <= threshold) {
            best = {theta, x, it, residual, true, cur.restarts};
            return best;
        }
        const double ny = y.norm();
        if (!(ny > std::numeric_limits<double>::min() * 1e4)) {
            if (++cur.restarts > max_restarts) {
                throw ConvergenceError("iterate collapsed into the deflated span", it, residual,
                                       op.basis().size());
            }
            x = fresh_start(cur);
            continue;
        }
        x = y / ny;
        if (it % cfg.reorthogonalize_every == 0) {
            project_out(V, x);
            x.normalize();
        }
    }
    best.iterations = max_iters;
    best.restarts = cur.restarts;
    best.converged = false;
    return best;
}

LeadingEigenpair leading_eigenpair_lanczos(const DeflatedOperator& op, const SolverConfig& cfg) {
    cfg.validate();
    const std::size_t n = op.size();
    const std::size_t k = op.basis().size();
    if (k >= n) throw PreconditionError("no undeflated direction left (K = n)");
    const std::size_t available = n - k;
    const std::size_t max_basis =
        std::min(available, cfg.lanczos_max_basis ? cfg.lanczos_max_basis : std::size_t{300});
    const std::size_t max_iters = cfg.max_iters ? cfg.max_iters : default_max_iters(n);
    const double threshold = cfg.tol * op.shift();
    const auto M = op.as_operator();

    LanczosOptions options;
    options.locked = op.basis().vectors;
    std::size_t spent = 0;
    std::size_t restarts = 0;
    LanczosState st = lanczos_init(M, std::min<std::size_t>(default_z_ini, max_basis), cfg.seed,
                                   options);
    LeadingEigenpair out;
    Eigen::VectorXd y;
    for (;;) {
        const RitzSet rs = ritz_pairs(st, 1);
        const double estimate = ritz_residual(st, rs, 1);
        const bool at_cap = st.size() >= max_basis;
        if (estimate <= threshold || st.complete || at_cap ||
            spent + st.matvecs >= max_iters) {
            Eigen::VectorXd x = st.Q * rs.U.col(0);
            project_out(options.locked, x);
            x.normalize();
            op.apply(x, y);
            const double theta = x.dot(y);
            const double residual = (y - theta * x).norm();
            spent += st.matvecs + 1;
            out = {theta, x, spent, residual, residual <= threshold, restarts};
            if (out.converged || spent >= max_iters) return out;
            // Either the subspace is full or the estimate was optimistic: restart from x.
            ++restarts;
            st = lanczos_init_from(M, x, std::min<std::size_t>(default_z_ini, max_basis),
                                   cfg.seed + restarts, options);
            continue;
        }
        lanczos_extend(st, std::min(default_z_aug, max_basis - st.size()));
    }
}

void canonicalize_sign(Eigen::VectorXd& v) {
    if (v.size() == 0) return;
    const double peak = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) >= peak * (1.0 - 1e-9)) {
            if (v[i] < 0.0) v = -v;
            return;
        }
    }
}

Eigenpair next_eigenpair(const LaplacianMatrix& L, const EigenBasis& basis,
                         const SolverConfig& cfg) {
    check_basis_for(L, basis);
    if (basis.size() < basis.delta) {
        throw PreconditionError("basis must contain the kernel before extension");
    }
    if (basis.size() >= L.size()) {
        throw PreconditionError("spectrum exhausted: basis already holds all " +
                                std::to_string(L.size()) + " eigenpairs");
    }
    const DeflatedOperator op(L, basis);
    const LeadingEigenpair lead = cfg.solver == LeadingSolver::Power
                                      ? leading_eigenpair_power(op, cfg)
                                      : leading_eigenpair_lanczos(op, cfg);
    if (!lead.converged) {
        throw ConvergenceError("eigenpair " + std::to_string(basis.size() + 1) +
                                   " did not converge (" + std::to_string(lead.iterations) +
                                   " iterations, residual " + std::to_string(lead.residual) + ")",
                               lead.iterations, lead.residual, basis.size());
    }
    Eigenpair pair;
    pair.value = lead.theta + op.shift();
    pair.vector = lead.x;
    canonicalize_sign(pair.vector);
    pair.iterations = lead.iterations;
    Eigen::VectorXd Lv;
    L.multiply(pair.vector, Lv);
    pair.residual = (Lv - pair.value * pair.vector).norm();
    return pair;
}

void extend(const LaplacianMatrix& L, EigenBasis& basis, const SolverConfig& cfg) {
    SolverConfig step = cfg;
    // Distinct but reproducible start vector per order.
    step.seed = cfg.seed + 0x9E3779B97F4A7C15ULL * (basis.size() + 1);
    basis.append(next_eigenpair(L, basis, step));
}

EigenBasis extend_to(const LaplacianMatrix& L, const ComponentLabeling& labeling,
                     std::size_t K_target, const SolverConfig& cfg) {
    if (K_target > L.size()) {
        throw PreconditionError("requested " + std::to_string(K_target) +
                                " eigenpairs of a " + std::to_string(L.size()) + "-node graph");
    }
    EigenBasis basis = kernel_basis(L, labeling);
    if (K_target < basis.delta) return basis.truncated(K_target);
    while (basis.size() < K_target) extend(L, basis, cfg);
    return basis;
}

// ---------------------------------------------------------------------------

DenseSpectrum dense_oracle(const Eigen::MatrixXd& symmetric) {
    if (static_cast<std::size_t>(symmetric.rows()) > dense_oracle_limit) {
        throw PreconditionError("dense oracle limited to n <= " +
                                std::to_string(dense_oracle_limit));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(symmetric);
    if (solver.info() != Eigen::Success) throw std::runtime_error("dense eigensolver failed");
    return {solver.eigenvalues(), solver.eigenvectors()};
}

DenseSpectrum dense_oracle(const LaplacianMatrix& L) {
    if (L.size() > dense_oracle_limit) {
        throw PreconditionError("dense oracle limited to n <= " +
                                std::to_string(dense_oracle_limit));
    }
    return dense_oracle(L.matrix.to_dense());
}

double orthonormality_error(const Eigen::MatrixXd& V) {
    if (V.cols() == 0) return 0.0;
    const Eigen::MatrixXd G = V.transpose() * V;
    return (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

// ---------------------------------------------------------------------------

nlohmann::json to_json(const EigenBasis& basis) {
    nlohmann::json j;
    j["format"] = "lapinc.eigenbasis";
    j["version"] = 1;
    j["kind"] = to_string(basis.kind);
    j["n"] = basis.dimension();
    j["k"] = basis.size();
    j["delta"] = basis.delta;
    j["strength_total"] = basis.strength_total;
    j["shift"] = basis.shift;
    j["values"] = basis.values;
    std::vector<double> flat(basis.vectors.data(), basis.vectors.data() + basis.vectors.size());
    j["vectors"] = flat;
    j["report"] = {{"iterations", basis.iterations}, {"residuals", basis.residuals}};
    if (basis.vectors.cols() > 0) {
        j["report"]["orthonormality_error"] = orthonormality_error(basis.vectors);
    }
    return j;
}

EigenBasis basis_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format").get<std::string>() != "lapinc.eigenbasis") {
            throw ParseError("not an eigenbasis document");
        }
        EigenBasis b;
        b.kind = laplacian_kind_from_string(j.at("kind").get<std::string>());
        const auto n = j.at("n").get<std::size_t>();
        const auto k = j.at("k").get<std::size_t>();
        b.delta = j.at("delta").get<std::size_t>();
        b.strength_total = j.at("strength_total").get<double>();
        b.shift = j.at("shift").get<double>();
        b.values = j.at("values").get<std::vector<double>>();
        const auto flat = j.at("vectors").get<std::vector<double>>();
        if (b.values.size() != k || flat.size() != n * k) {
            throw ParseError("eigenbasis document has inconsistent sizes");
        }
        b.vectors = Eigen::Map<const Eigen::MatrixXd>(flat.data(), static_cast<Eigen::Index>(n),
                                                      static_cast<Eigen::Index>(k));
        b.iterations = j.at("report").at("iterations").get<std::vector<std::size_t>>();
        b.residuals = j.at("report").at("residuals").get<std::vector<double>>();
        return b;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed eigenbasis document: ") + e.what());
    }
}

}  // namespace lapinc
