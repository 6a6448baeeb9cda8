#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <stdexcept>

namespace coassoc {

using SpMat = Eigen::SparseMatrix<double>;

struct EigenSolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SymEigs {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // B-orthonormal columns
};

// Eigenpairs of A x = lambda B x closest to sigma, where A is given only through
// solve(y) = (A - sigma B)^{-1} y. B must be SPD. A constrained solve (range in a
// B-orthogonal subspace) restricts the problem to that subspace.
SymEigs eigs_shift_invert(int n, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& solve, const SpMat& B,
                          int nev, double sigma, double tol = 1e-12, int max_iter = 3000);

// Dense generalized problem, all eigenpairs.
SymEigs eigs_dense(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

}  // namespace coassoc
