#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>

#include "odenet/errors.hpp"

namespace odenet {

// Componentwise (Hadamard) product u ⊙ v.
inline Eigen::VectorXd hadamard(const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
    if (u.size() != v.size())
        throw DimensionError("hadamard: lengths differ (" + std::to_string(u.size()) +
                             " vs " + std::to_string(v.size()) + ")");
    return u.cwiseProduct(v);
}

// Spectral norm |m|_2 (largest singular value).
inline double operator_norm(const Eigen::MatrixXd& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    return svd.singularValues()(0);
}

}  // namespace odenet
