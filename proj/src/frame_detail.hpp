#pragma once

#include <Eigen/Dense>

namespace curvcone::detail {

// Extends orthonormal columns to `total` orthonormal columns using the
// standard basis vectors in order (deterministic).
Eigen::MatrixXd complete_basis(const Eigen::MatrixXd& partial, int total);

}  // namespace curvcone::detail
