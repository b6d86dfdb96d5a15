#pragma once

#include <Eigen/Core>

namespace spca {

struct SymmetricEigen {
  Eigen::VectorXd values;   // sorted by decreasing |value|, positive first on ties
  Eigen::MatrixXd vectors;  // orthonormal columns
};

// Eigenpairs of a real symmetric matrix with |value| > max(abs_floor, rel_floor * max|value|).
// Only the requested eigenvectors are computed.
SymmetricEigen symmetric_eigen_above(Eigen::MatrixXd a, double abs_floor, double rel_floor = 0.0);

// All eigenvalues of a real symmetric matrix, ascending.
Eigen::VectorXd symmetric_eigenvalues(Eigen::MatrixXd a);

}  // namespace spca
