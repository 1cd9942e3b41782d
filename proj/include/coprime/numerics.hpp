#pragma once

// Dense complex linear algebra used throughout the library. Thin layer over
// Eigen; matrices here never exceed a few hundred rows.

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace coprime {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

/// True iff max |A - A^H| <= tol. Non-square matrices are never Hermitian.
bool hermitian_check(const CMatrix& A, double tol);

struct Svd {
  CMatrix U;         // left singular vectors, columns
  RVector singular;  // nonincreasing, nonnegative
  CMatrix V;         // right singular vectors, columns; A = U diag(s) V^H
};

/// Full (thin) SVD. Throws NonConvergence if the decomposition fails or
/// produces non-finite values.
Svd svd(const CMatrix& A);

/// Numerical rank: count of singular values above rank_tol * s_max.
int numerical_rank(const RVector& singular, double rank_tol);

/// Minimum-norm least-squares solution x = V S^+ U^H c, with singular values
/// below rank_tol * s_max treated as zero. `c` may hold several columns.
CMatrix min_norm_lstsq(const CMatrix& A, const CMatrix& c, double rank_tol);

/// Same, reusing a precomputed factorization of A.
CMatrix min_norm_lstsq(const Svd& factor, const CMatrix& c, double rank_tol);

/// Kronecker product; the first operand supplies the block (outer) index, so
/// (a (x) b)[i * len(b) + k] = a[i] * b[k] (0-based).
CMatrix kron(const CMatrix& A, const CMatrix& B);

/// Column-wise vectorization.
CVector vec(const CMatrix& A);

}  // namespace coprime
