#include "lapinc/lanczos.hpp"

#include "lapinc/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <random>

namespace lapinc {

namespace {

constexpr double breakdown_ratio = 1e-13;

std::size_t max_dimension(const LanczosState& st) {
    const auto locked = static_cast<std::size_t>(st.locked.cols());
    return st.op.n > locked ? st.op.n - locked : 0;
}

void orthogonalize(const LanczosState& st, Eigen::VectorXd& w) {
    for (int pass = 0; pass < 2; ++pass) {
        if (st.locked.cols() > 0) w.noalias() -= st.locked * (st.locked.transpose() * w);
        if (st.Q.cols() > 0) w.noalias() -= st.Q * (st.Q.transpose() * w);
    }
}

// Random unit vector orthogonal to Q and the locked space; empty when none exists.
Eigen::VectorXd random_orthogonal(const LanczosState& st, std::uint64_t salt) {
    std::mt19937_64 rng(st.seed ^ (0xD1B54A32D192ED03ULL * (salt + 1)));
    std::normal_distribution<double> normal;
    for (int attempt = 0; attempt < 3; ++attempt) {
        Eigen::VectorXd x(static_cast<Eigen::Index>(st.op.n));
        for (auto& v : x) v = normal(rng);
        x.normalize();
        orthogonalize(st, x);
        const double norm = x.norm();
        if (norm > 1e-8) return x / norm;
    }
    return {};
}

// Appends q as the next Lanczos vector and runs one recurrence step.
void push_vector(LanczosState& st, const Eigen::VectorXd& q) {
    const Eigen::Index z = st.Q.cols();
    st.Q.conservativeResize(static_cast<Eigen::Index>(st.op.n), z + 1);
    st.Q.col(z) = q;
    Eigen::VectorXd w;
    st.op.apply(q, w);
    ++st.matvecs;
    st.norm_estimate = std::max(st.norm_estimate, w.norm());
    double alpha = q.dot(w);
    w.noalias() -= alpha * q;
    if (z > 0) w.noalias() -= st.beta.back() * st.Q.col(z - 1);
    // Full reorthogonalization; the component along q refines alpha.
    for (int pass = 0; pass < 2; ++pass) {
        if (st.locked.cols() > 0) w.noalias() -= st.locked * (st.locked.transpose() * w);
        const Eigen::VectorXd h = st.Q.transpose() * w;
        alpha += h[z];
        w.noalias() -= st.Q * h;
    }
    st.alpha.push_back(alpha);
    st.beta.push_back(w.norm());
    st.pending = std::move(w);
    if (st.size() >= max_dimension(st)) st.complete = true;
}

void grow_one(LanczosState& st) {
    if (st.complete) return;
    if (st.size() >= max_dimension(st)) {
        st.complete = true;
        return;
    }
    const double coupling = st.beta.back();
    if (coupling > breakdown_ratio * std::max(st.norm_estimate, 1e-300)) {
        push_vector(st, st.pending / coupling);
        return;
    }
    // Invariant subspace found: continue from a fresh direction with zero coupling.
    st.beta.back() = 0.0;
    ++st.breakdowns;
    const Eigen::VectorXd q = random_orthogonal(st, st.breakdowns);
    if (q.size() == 0) {
        st.complete = true;
        return;
    }
    push_vector(st, q);
}

LanczosState make_state(const SymmetricOperator& M, std::uint64_t seed, LanczosOptions options) {
    LanczosState st;
    st.op = M;
    st.seed = seed;
    st.Z_aug = options.Z_aug;
    st.tolerance = options.tolerance;
    st.locked = std::move(options.locked);
    if (st.locked.cols() > 0 && static_cast<std::size_t>(st.locked.rows()) != M.n) {
        throw PreconditionError("locked vectors do not match operator size");
    }
    if (st.locked.cols() == 0) st.locked.resize(static_cast<Eigen::Index>(M.n), 0);
    st.Q.resize(static_cast<Eigen::Index>(M.n), 0);
    return st;
}

LanczosState start_from(LanczosState st, Eigen::VectorXd start, std::size_t Z_ini) {
    st.Z_ini = Z_ini;
    if (max_dimension(st) == 0 || Z_ini == 0) {
        st.complete = max_dimension(st) == 0;
        return st;
    }
    orthogonalize(st, start);
    const double norm = start.norm();
    if (!(norm > 1e-8)) {
        start = random_orthogonal(st, 0);
        if (start.size() == 0) {
            st.complete = true;
            return st;
        }
    } else {
        start /= norm;
    }
    push_vector(st, start);
    while (st.size() < Z_ini && !st.complete) grow_one(st);
    return st;
}

}  // namespace

Eigen::MatrixXd LanczosState::tridiagonal() const {
    const auto Z = static_cast<Eigen::Index>(size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(Z, Z);
    for (Eigen::Index i = 0; i < Z; ++i) {
        T(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < Z) T(i, i + 1) = T(i + 1, i) = beta[static_cast<std::size_t>(i)];
    }
    return T;
}

SymmetricOperator shifted_operator(const LaplacianMatrix& L, const ComponentLabeling& labeling) {
    auto lap = std::make_shared<const LaplacianMatrix>(L);
    auto kernel = std::make_shared<const EigenBasis>(kernel_basis(*lap, labeling));
    auto deflated = std::make_shared<const DeflatedOperator>(*lap, *kernel);
    SymmetricOperator op;
    op.n = L.size();
    op.apply = [lap, kernel, deflated](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        deflated->apply(x, y);
    };
    return op;
}

LanczosState lanczos_init(const SymmetricOperator& M, std::size_t Z_ini, std::uint64_t seed,
                          LanczosOptions options) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd start(static_cast<Eigen::Index>(M.n));
    for (auto& v : start) v = normal(rng);
    return start_from(make_state(M, seed, std::move(options)), std::move(start), Z_ini);
}

LanczosState lanczos_init_from(const SymmetricOperator& M, const Eigen::VectorXd& start,
                               std::size_t Z_ini, std::uint64_t seed, LanczosOptions options) {
    if (static_cast<std::size_t>(start.size()) != M.n) {
        throw PreconditionError("start vector length does not match operator");
    }
    return start_from(make_state(M, seed, std::move(options)), start, Z_ini);
}

void lanczos_extend(LanczosState& st, std::size_t Z_aug) {
    for (std::size_t i = 0; i < Z_aug && !st.complete; ++i) grow_one(st);
}

RitzSet ritz_pairs(const LanczosState& st, std::size_t K) {
    const std::size_t Z = st.size();
    if (K > Z) {
        throw PreconditionError("requested " + std::to_string(K) + " Ritz pairs from " +
                                std::to_string(Z) + " Lanczos vectors");
    }
    RitzSet rs;
    if (K == 0) return rs;
    const auto z = static_cast<Eigen::Index>(Z);
    Eigen::VectorXd theta;
    Eigen::MatrixXd S;
    if (Z == 1) {
        theta = Eigen::VectorXd::Constant(1, st.alpha[0]);
        S = Eigen::MatrixXd::Ones(1, 1);
    } else {
        Eigen::VectorXd diag = Eigen::Map<const Eigen::VectorXd>(st.alpha.data(), z);
        Eigen::VectorXd sub = Eigen::Map<const Eigen::VectorXd>(st.beta.data(), z - 1);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
        if (es.info() != Eigen::Success) throw std::runtime_error("tridiagonal eigensolver failed");
        theta = es.eigenvalues();
        S = es.eigenvectors();
    }
    std::vector<Eigen::Index> order(static_cast<std::size_t>(z));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const double ma = std::abs(theta[a]);
        const double mb = std::abs(theta[b]);
        if (ma != mb) return ma > mb;
        return theta[a] > theta[b];
    });
    rs.U.resize(z, static_cast<Eigen::Index>(K));
    const double coupling = st.complete ? 0.0 : st.beta.back();
    for (std::size_t k = 0; k < K; ++k) {
        const Eigen::Index src = order[k];
        rs.values.push_back(theta[src]);
        rs.U.col(static_cast<Eigen::Index>(k)) = S.col(src);
        rs.residuals.push_back(ritz_residual(coupling, S(z - 1, src)));
    }
    return rs;
}

double ritz_residual(double coupling, double bottom_entry) {
    return std::abs(coupling * bottom_entry);
}

double ritz_residual(const LanczosState& st, const RitzSet& rs, std::size_t K) {
    if (K == 0 || K > rs.residuals.size()) {
        throw PreconditionError("Ritz index out of range");
    }
    if (st.complete) return 0.0;
    return rs.residuals[K - 1];
}

Eigen::MatrixXd ritz_vectors(const LanczosState& st, const RitzSet& rs) { return st.Q * rs.U; }

// ---------------------------------------------------------------------------

LanczosIo::LanczosIo(SymmetricOperator M, std::size_t Z_ini, std::size_t Z_aug, double tolerance,
                     std::uint64_t seed, Eigen::MatrixXd locked) {
    LanczosOptions options;
    options.Z_aug = Z_aug;
    options.tolerance = tolerance;
    options.locked = std::move(locked);
    st_ = lanczos_init(M, Z_ini, seed, std::move(options));
}

const LanczosWorkEntry& LanczosIo::advance() {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t K = K_ + 1;
    if (K > max_dimension(st_)) {
        throw PreconditionError("Lanczos-IO order " + std::to_string(K) +
                                " exceeds the available dimension");
    }
    while (st_.size() < K && !st_.complete) lanczos_extend(st_, st_.Z_aug);
    rs_ = ritz_pairs(st_, K);
    double residual = ritz_residual(st_, rs_, K);
    while (residual > st_.tolerance && !st_.complete) {
        lanczos_extend(st_, st_.Z_aug);
        rs_ = ritz_pairs(st_, K);
        residual = ritz_residual(st_, rs_, K);
        if (st_.complete) exhausted_ = true;
    }
    K_ = K;
    const auto t1 = std::chrono::steady_clock::now();
    log_.push_back({K, st_.size(), st_.matvecs,
                    std::chrono::duration<double, std::milli>(t1 - t0).count(), residual});
    return log_.back();
}

double default_lanczos_tolerance(const SymmetricOperator& M, std::uint64_t seed) {
    return std::numeric_limits<double>::epsilon() * estimate_norm(M, 50, seed);
}

LanczosIoResult lanczos_io(const SymmetricOperator& M, std::size_t K_target, std::size_t Z_ini,
                           std::size_t Z_aug, double tolerance, std::uint64_t seed,
                           Eigen::MatrixXd locked) {
    if (K_target > M.n) throw PreconditionError("K_target exceeds operator dimension");
    if (tolerance < 0.0) tolerance = default_lanczos_tolerance(M, seed);
    LanczosIo io(M, Z_ini, Z_aug, tolerance, seed, std::move(locked));
    for (std::size_t k = 0; k < K_target; ++k) io.advance();
    LanczosIoResult out;
    out.log = io.log();
    out.exhausted = io.exhausted();
    if (K_target > 0) {
        out.values = io.ritz().values;
        out.vectors = ritz_vectors(io.state(), io.ritz());
    }
    return out;
}

namespace {

// Appends the Ritz pairs (shifted back by +shift) to a kernel basis.
void append_ritz(const LaplacianMatrix& L, EigenBasis& basis, const LanczosState& st,
                 const RitzSet& rs) {
    const Eigen::MatrixXd X = ritz_vectors(st, rs);
    Eigen::VectorXd Lv;
    for (std::size_t k = 0; k < rs.values.size(); ++k) {
        Eigenpair p;
        p.value = rs.values[k] + basis.shift;
        p.vector = X.col(static_cast<Eigen::Index>(k)).normalized();
        canonicalize_sign(p.vector);
        L.multiply(p.vector, Lv);
        p.residual = (Lv - p.value * p.vector).norm();
        p.iterations = st.matvecs;
        basis.append(p);
    }
}

}  // namespace

EigenBasis lanczos_io_smallest(const LaplacianMatrix& L, const ComponentLabeling& labeling,
                               std::size_t K_target, double tolerance, std::uint64_t seed) {
    if (K_target > L.size()) throw PreconditionError("K_target exceeds graph size");
    EigenBasis basis = kernel_basis(L, labeling);
    if (K_target <= basis.delta) return basis.truncated(K_target);
    const auto M = shifted_operator(L, labeling);
    if (tolerance < 0.0) tolerance = default_lanczos_tolerance(M, seed);
    LanczosIo io(M, default_z_ini, default_z_aug, tolerance, seed, basis.vectors);
    while (basis.delta + io.order() < K_target) io.advance();
    append_ritz(L, basis, io.state(), io.ritz());
    return basis;
}

EigenBasis batch_smallest(const LaplacianMatrix& L, const ComponentLabeling& labeling,
                          std::size_t K, const SolverConfig& cfg) {
    cfg.validate();
    if (K > L.size()) {
        throw PreconditionError("requested " + std::to_string(K) + " eigenpairs of a " +
                                std::to_string(L.size()) + "-node graph");
    }
    EigenBasis basis = kernel_basis(L, labeling);
    if (K <= basis.delta) return basis.truncated(K);
    const std::size_t wanted = K - basis.delta;
    const double threshold = cfg.tol * basis.shift;
    const std::size_t max_iters = cfg.max_iters ? cfg.max_iters : default_max_iters(L.size());

    const auto M = shifted_operator(L, labeling);
    LanczosOptions options;
    options.locked = basis.vectors;
    LanczosState st = lanczos_init(M, std::max(default_z_ini, wanted), cfg.seed, options);
    for (;;) {
        while (st.size() < wanted && !st.complete) lanczos_extend(st, default_z_aug);
        const RitzSet rs = ritz_pairs(st, wanted);
        const bool done =
            st.complete || std::all_of(rs.residuals.begin(), rs.residuals.end(),
                                       [&](double r) { return r <= threshold; });
        if (done) {
            append_ritz(L, basis, st, rs);
            return basis;
        }
        if (st.matvecs >= max_iters) {
            throw ConvergenceError("batch Lanczos did not converge for K = " + std::to_string(K),
                                   st.matvecs,
                                   *std::max_element(rs.residuals.begin(), rs.residuals.end()),
                                   basis.size());
        }
        lanczos_extend(st, default_z_aug);
    }
}

}  // namespace lapinc
