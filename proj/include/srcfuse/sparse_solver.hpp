#pragma once

#include <Eigen/Dense>

namespace srcfuse {

// An (possibly underdetermined) linear system A x = y with A of size d x n.
struct LinearSystem {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
};

struct SparseSolution {
  Eigen::VectorXd coeffs;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Thin SVD, singular values sorted non-increasing.
struct SvdFactors {
  Eigen::MatrixXd u;   // column-orthonormal left factor
  Eigen::VectorXd s;   // non-negative, non-increasing
  Eigen::MatrixXd vt;  // transposed column-orthonormal right factor
};

SvdFactors svd(const Eigen::MatrixXd& m);

// Numeric rank from a singular value vector: entries above
// max(rows, cols) * eps * s(0).
int numeric_rank(const SvdFactors& f, int rows, int cols);

// Minimum l2-norm solution of A x = y via the SVD pseudo-inverse. For an
// inconsistent system the least-squares solution is returned with
// converged = false.
SparseSolution min_l2_solution(const LinearSystem& sys);

// l1 minimization: approximately minimize ||x||_1 subject to
// ||A x - y||_2 <= tol, solved by tracking the lasso regularization path
// (homotopy). converged is true iff the residual constraint was met within
// max_iter path steps.
SparseSolution basis_pursuit(const LinearSystem& sys, double tol = 1e-6,
                             int max_iter = 10000);

}  // namespace srcfuse
