#pragma once

#include <span>
#include <vector>

#include "marchenko/fourier.hpp"
#include "marchenko/reflectionless.hpp"

namespace marchenko {

enum class GridRule { simpson, boole, gregory };

struct GridConfig {
  int n = 200;       // intervals on [x, x + L]
  double L = 20.0;
  GridRule rule = GridRule::gregory;
  double truncation_tol = 1e-6;  // |Omega(2x + L)| relative to max |Omega|
  double condition_cap = kDefaultConditionCap;
};

/// Kernels on the row y_j = x + j L / n. K1 and K2bar come from the two
/// uncoupled Nystrom systems, K1bar and K2 from the follow-up quadratures.
struct NumericKernelSolution {
  double x = 0;
  GridRule rule = GridRule::simpson;
  std::vector<double> y;
  std::vector<double> weights;
  std::vector<cplx> K1, K2, K1bar, K2bar;
  double condition = 1;  // worse of the two system estimates
  double residual = 0;   // relative residual of the discrete systems
};

/// Throws TruncationError when Omega or OmegaBar is not small at 2x + L,
/// ConditioningError when a discrete system exceeds the condition cap.
NumericKernelSolution solve_at(const OmegaKernel& omega, double x, const GridConfig& grid = {});

/// Max entrywise residual of the coupled 2x2 system (off-diagonal entries
/// with Omega terms) on the solution's y-grid, divided by
/// max(1, max |Omega|, max |OmegaBar|) over the sampled range. The integrals use a rule
/// different from the one that built the solution, so the value measures
/// discretization error rather than echoing the solve.
double coupled_residual(const OmegaKernel& omega, const NumericKernelSolution& sol);

struct RecoverOptions {
  GridConfig grid;
  // Between output points: 3-point Gauss-Legendre panels, bisected while
  // they disagree with Simpson's rule on the same data.
  double adapt_rel_tol = 1e-4;
  double adapt_abs_tol = 1e-9;
  int max_bisections = 8;
  double tail_panel = 0.5;         // panel width beyond the output grid
  double tail_q_tol = 1e-12;       // |Q| where a tail march stops
  double tail_condition_cap = 1e15;  // tail marches stop (and extrapolate) beyond this
  int max_tail_panels = 80;
  int threads = 1;
  bool keep_solutions = false;
};

struct RecoveredField {
  std::vector<double> x;
  std::vector<cplx> q, r, E, Q;
  std::vector<cplx> G;  // integral of Q over [x, +inf)
  cplx mu = 0;          // -4i times the integral of Q over the line
  cplx mu_principal = 0;
  cplx phase = 1;       // e^{i mu / 2} = e^{2 int Q}
  double left_end = 0, right_end = 0;  // where the tail marches stopped
  bool left_extrapolated = false;      // left tail closed by an exponential estimate
  std::vector<NumericKernelSolution> solutions;  // at the output x, if kept
};

/// Q = K1bar(x,x) - K2(x,x); q = -2 K1(x,x) e^{-4G}, r = -2 K2bar(x,x) e^{4G};
/// E(x) = e^{2 int_{-inf}^x Q}. xs must be sorted ascending.
RecoveredField recover(const OmegaKernel& omega, std::span<const double> xs, const RecoverOptions& opts = {});

/// Jost solutions at the solution's x for real zeta, via quadrature of the
/// kernels against e^{+-i lambda y}; G is the integral of Q over [x, +inf).
/// The kernels are integrated as piecewise polynomials against the
/// exponentials (Filon style), so the oscillation does not limit accuracy.
JostPair reconstruct_jost(const NumericKernelSolution& sol, cplx G, cplx zeta);

}  // namespace marchenko
