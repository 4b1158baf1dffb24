#include "marchenko/linalg.hpp"

#include <cmath>
#include <limits>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "marchenko/errors.hpp"

namespace marchenko {

namespace {

void require_square(const CMatrix& A, const char* what) {
  if (A.rows() != A.cols())
    throw DimensionError(std::string(what) + " must be square, got " + std::to_string(A.rows()) +
                         "x" + std::to_string(A.cols()));
}

CMatrix jordan_exp(const CMatrix& A, cplx t) {
  const Eigen::Index n = A.rows();
  CMatrix E = CMatrix::Zero(n, n);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start;
    while (end + 1 < n && A(end, end + 1) == cplx(1.0)) ++end;
    const Eigen::Index m = end - start + 1;
    const cplx scale = std::exp(A(start, start) * t);
    // Entry (i, j) of the block is scale * t^{j-i} / (j-i)!.
    cplx term = scale;
    for (Eigen::Index k = 0; k < m; ++k) {
      for (Eigen::Index i = 0; i + k < m; ++i) E(start + i, start + i + k) = term;
      term *= t / static_cast<double>(k + 1);
    }
    start = end + 1;
  }
  return E;
}

void equilibrate(const CMatrix& M, Eigen::VectorXd& row, Eigen::VectorXd& col) {
  const Eigen::Index n = M.rows();
  row = Eigen::VectorXd::Ones(n);
  col = Eigen::VectorXd::Ones(M.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = M.row(i).cwiseAbs().maxCoeff();
    if (m > 0 && std::isfinite(m)) row(i) = 1.0 / m;
  }
  for (Eigen::Index j = 0; j < M.cols(); ++j) {
    double m = 0;
    for (Eigen::Index i = 0; i < n; ++i) m = std::max(m, std::abs(M(i, j)) * row(i));
    if (m > 0 && std::isfinite(m)) col(j) = 1.0 / m;
  }
}

}  // namespace

bool is_jordan_form(const CMatrix& A) {
  if (A.rows() != A.cols()) return false;
  const Eigen::Index n = A.rows();
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      if (j == i + 1) {
        if (A(i, j) == cplx(0.0)) continue;
        if (A(i, j) != cplx(1.0) || A(i, i) != A(j, j)) return false;
      } else if (A(i, j) != cplx(0.0)) {
        return false;
      }
    }
  return true;
}

CMatrix mat_exp(const CMatrix& A, cplx t) {
  require_square(A, "matrix exponential argument");
  if (A.rows() == 0) return CMatrix(0, 0);
  if (is_jordan_form(A)) return jordan_exp(A, t);
  const CMatrix At = A * t;
  return At.exp();
}

double condition_estimate(const CMatrix& A) {
  require_square(A, "condition estimate argument");
  if (A.rows() == 0) return 1.0;
  if (!A.allFinite()) return std::numeric_limits<double>::infinity();
  Eigen::VectorXd row, col;
  equilibrate(A, row, col);
  const CMatrix S = row.asDiagonal() * A * col.asDiagonal();
  Eigen::PartialPivLU<CMatrix> lu(S);
  const double rc = lu.rcond();
  if (!(rc > 0) || !std::isfinite(rc)) return std::numeric_limits<double>::infinity();
  return 1.0 / rc;
}

CMatrix equilibrated_solve(const CMatrix& M, const CMatrix& b, double& condition) {
  require_square(M, "linear system matrix");
  if (M.rows() == 0) {
    condition = 1.0;
    return CMatrix(0, b.cols());
  }
  Eigen::VectorXd row, col;
  equilibrate(M, row, col);
  const CMatrix S = row.asDiagonal() * M * col.asDiagonal();
  Eigen::PartialPivLU<CMatrix> lu(S);
  const double rc = lu.rcond();
  condition = (rc > 0 && std::isfinite(rc)) ? 1.0 / rc : std::numeric_limits<double>::infinity();
  const CMatrix rhs = row.asDiagonal() * b;
  return col.asDiagonal() * lu.solve(rhs);
}

InverseResult mat_inverse(const CMatrix& A, double cap) {
  require_square(A, "matrix to invert");
  const Eigen::Index n = A.rows();
  double cond = 1.0;
  CMatrix inv = equilibrated_solve(A, CMatrix::Identity(n, n), cond);
  if (!(cond <= cap) || !inv.allFinite())
    throw SingularMatrixError("matrix is numerically singular (condition " + std::to_string(cond) + ")",
                              cond, std::numeric_limits<double>::quiet_NaN());
  return {std::move(inv), cond};
}

CMatrix solve_sylvester(const CMatrix& A, const CMatrix& Abar, const CMatrix& B,
                        const CMatrix& Cbar, double cap) {
  require_square(A, "A");
  require_square(Abar, "Abar");
  const Eigen::Index n = A.rows(), m = Abar.rows();
  if (B.rows() != n || B.cols() != 1)
    throw DimensionError("B must be a column with " + std::to_string(n) + " rows");
  if (Cbar.rows() != 1 || Cbar.cols() != m)
    throw DimensionError("Cbar must be a row with " + std::to_string(m) + " columns");
  if (n == 0 || m == 0) return CMatrix::Zero(n, m);

  // vec(i X Y - i Z X) = i (Y^T kron I - I kron Z) vec(X), column-major vec.
  const CMatrix In = CMatrix::Identity(n, n), Im = CMatrix::Identity(m, m);
  const CMatrix K = I_unit * (Eigen::kroneckerProduct(Abar.transpose(), In).eval() -
                              Eigen::kroneckerProduct(Im, A).eval());
  const CMatrix rhs = B * Cbar;
  const CMatrix vec_rhs = Eigen::Map<const CVector>(rhs.data(), n * m);
  double cond = 1.0;
  const CMatrix x = equilibrated_solve(K, vec_rhs, cond);
  if (!(cond <= cap) || !x.allFinite())
    throw SpectralOverlapError("Sylvester operator is singular: spectra of A and Abar overlap (condition " +
                               std::to_string(cond) + ")");
  return Eigen::Map<const CMatrix>(x.data(), n, m);
}

}  // namespace marchenko
