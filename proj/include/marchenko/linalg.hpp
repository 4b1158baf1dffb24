#pragma once

#include <complex>

#include <Eigen/Dense>

namespace marchenko {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

inline constexpr cplx I_unit{0.0, 1.0};
inline constexpr double kDefaultConditionCap = 1e12;

/// e^{At}. Exact block formula when A is in Jordan form (upper bidiagonal,
/// superdiagonal entries 0 or 1, constant diagonal along each chain);
/// Pade scaling-and-squaring otherwise.
CMatrix mat_exp(const CMatrix& A, cplx t);

/// True when A is upper bidiagonal with 0/1 superdiagonal and each chain of
/// ones joins equal diagonal entries.
bool is_jordan_form(const CMatrix& A);

/// 1-norm condition estimate of A after row and column equilibration, so
/// graded matrices (rows scaled by exponentials) are not flagged.
double condition_estimate(const CMatrix& A);

struct InverseResult {
  CMatrix inverse;
  double condition;
};

/// Throws SingularMatrixError when the equilibrated condition exceeds cap.
InverseResult mat_inverse(const CMatrix& A, double cap = kDefaultConditionCap);

/// Solves i X Y - i Z X = B Cbar for X (rows(Z) x rows(Y)) by Kronecker
/// linearization. With (Z, Y) = (A, Abar) this is the Gram matrix M.
CMatrix solve_sylvester(const CMatrix& A, const CMatrix& Abar, const CMatrix& B,
                        const CMatrix& Cbar, double cap = kDefaultConditionCap);

/// Solves M x = b with row/column equilibration and partial pivoting.
/// `condition` receives the equilibrated 1-norm condition estimate.
CMatrix equilibrated_solve(const CMatrix& M, const CMatrix& b, double& condition);

}  // namespace marchenko
