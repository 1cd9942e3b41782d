#include "coprime/numerics.hpp"

#include <cmath>

#include "coprime/errors.hpp"

namespace coprime {

bool hermitian_check(const CMatrix& A, double tol) {
  if (A.rows() != A.cols()) return false;
  const auto n = A.rows();
  for (Eigen::Index c = 0; c < n; ++c) {
    for (Eigen::Index r = c; r < n; ++r) {
      if (std::abs(A(r, c) - std::conj(A(c, r))) > tol) return false;
    }
  }
  return true;
}

Svd svd(const CMatrix& A) {
  if (A.size() == 0) throw ShapeMismatch("svd: empty matrix");
  Eigen::JacobiSVD<CMatrix> solver(A, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (solver.info() != Eigen::Success) {
    throw NonConvergence("svd: Jacobi iteration did not converge");
  }
  Svd out{solver.matrixU(), solver.singularValues(), solver.matrixV()};
  if (!out.singular.allFinite() || !out.U.allFinite() || !out.V.allFinite()) {
    throw NonConvergence("svd: non-finite factors");
  }
  return out;
}

int numerical_rank(const RVector& singular, double rank_tol) {
  if (singular.size() == 0) return 0;
  const double cutoff = rank_tol * singular(0);
  int rank = 0;
  for (Eigen::Index i = 0; i < singular.size(); ++i) {
    if (singular(i) > cutoff && singular(i) > 0.0) ++rank;
  }
  return rank;
}

CMatrix min_norm_lstsq(const Svd& f, const CMatrix& c, double rank_tol) {
  if (f.U.rows() != c.rows()) {
    throw ShapeMismatch("min_norm_lstsq: right-hand side has " + std::to_string(c.rows()) +
                        " rows, expected " + std::to_string(f.U.rows()));
  }
  const int rank = numerical_rank(f.singular, rank_tol);
  CMatrix x = CMatrix::Zero(f.V.rows(), c.cols());
  if (rank == 0) return x;
  CMatrix projected = f.U.leftCols(rank).adjoint() * c;
  for (int k = 0; k < rank; ++k) projected.row(k) /= f.singular(k);
  x.noalias() = f.V.leftCols(rank) * projected;
  return x;
}

CMatrix min_norm_lstsq(const CMatrix& A, const CMatrix& c, double rank_tol) {
  if (A.rows() != c.rows()) {
    throw ShapeMismatch("min_norm_lstsq: A has " + std::to_string(A.rows()) +
                        " rows but c has " + std::to_string(c.rows()));
  }
  return min_norm_lstsq(svd(A), c, rank_tol);
}

CMatrix kron(const CMatrix& A, const CMatrix& B) {
  CMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    }
  }
  return out;
}

CVector vec(const CMatrix& A) {
  return Eigen::Map<const CVector>(A.data(), A.size());
}

}  // namespace coprime
