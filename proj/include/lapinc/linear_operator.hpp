#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <functional>

namespace lapinc {

/// A symmetric linear map given only through its action y = A x.
struct SymmetricOperator {
    std::size_t n = 0;
    std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)> apply;

    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
        Eigen::VectorXd y;
        apply(x, y);
        return y;
    }

    /// Column-by-column dense realization; test sizes only.
    Eigen::MatrixXd to_dense() const;
};

/// Operator backed by a dense symmetric matrix (copied).
SymmetricOperator dense_operator(Eigen::MatrixXd matrix);

/// Rough 2-norm estimate from `iterations` power steps on a seeded random start.
double estimate_norm(const SymmetricOperator& op, std::size_t iterations, std::uint64_t seed);

}  // namespace lapinc
