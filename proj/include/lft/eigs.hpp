#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "lft/errors.hpp"

namespace lft {

struct EigPairs {
  Eigen::VectorXd theta;  // ascending generalized eigenvalues, A v = theta E v
  Eigen::MatrixXd vectors;  // columns, normalized so cell * v^T E v = 1
};

// Lowest k eigenpairs of A v = theta * diag(weight) * v with A sparse SPD.
// Dense route for moderate sizes, shift-invert block Lanczos (block 2, full
// reorthogonalization) above that; both deterministic.
EigPairs generalized_lowest(const Eigen::SparseMatrix<double>& A,
                            const Eigen::VectorXd& weight, int k, double cell,
                            double tol = 1e-9);

}  // namespace lft
