#include "lapinc/linear_operator.hpp"

#include <random>

namespace lapinc {

Eigen::MatrixXd SymmetricOperator::to_dense() const {
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd d(N, N);
    Eigen::VectorXd e = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd y;
    for (Eigen::Index j = 0; j < N; ++j) {
        e[j] = 1.0;
        apply(e, y);
        d.col(j) = y;
        e[j] = 0.0;
    }
    return d;
}

SymmetricOperator dense_operator(Eigen::MatrixXd matrix) {
    SymmetricOperator op;
    op.n = static_cast<std::size_t>(matrix.rows());
    op.apply = [m = std::move(matrix)](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
        y.noalias() = m * x;
    };
    return op;
}

double estimate_norm(const SymmetricOperator& op, std::size_t iterations, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Eigen::VectorXd x(static_cast<Eigen::Index>(op.n));
    for (auto& v : x) v = normal(rng);
    x.normalize();
    Eigen::VectorXd y;
    double norm = 0.0;
    for (std::size_t it = 0; it < iterations; ++it) {
        op.apply(x, y);
        norm = y.norm();
        if (norm == 0.0) break;
        x = y / norm;
    }
    return norm;
}

}  // namespace lapinc
