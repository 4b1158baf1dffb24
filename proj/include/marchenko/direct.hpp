#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "marchenko/linalg.hpp"
#include "marchenko/reflectionless.hpp"

namespace marchenko {

using ScalarField = std::function<cplx(double)>;
using Vec2 = Eigen::Vector2cd;

/// q(x), r(x) on [x_min, x_max], treated as zero outside. dq / dr are
/// optional; when empty, sixth-order differences of q / r are used.
struct PotentialField {
  ScalarField q, r;
  ScalarField dq, dr;
  double x_min = -12.0;
  double x_max = 12.0;
  double tail_tol = 1e-12;

  cplx q_at(double x) const { return (x < x_min || x > x_max) ? cplx(0) : q(x); }
  cplx r_at(double x) const { return (x < x_min || x > x_max) ? cplx(0) : r(x); }
  cplx dq_at(double x) const;
  cplx dr_at(double x) const;
  /// max(|q|, |r|) at the two window ends.
  double tail_level() const;
};

PotentialField zero_field(double x_min = -12.0, double x_max = 12.0);

/// Cubic interpolation (real and imaginary parts separately) of samples on
/// the uniform grid x0 + k h: Hermite when derivative samples are given,
/// B-spline otherwise.
PotentialField field_from_samples(double x0, double h, const std::vector<cplx>& q, const std::vector<cplx>& r,
                                  const std::vector<cplx>& dq = {}, const std::vector<cplx>& dr = {});

/// Samples the closed-form potentials (with exact derivatives) every h on
/// the window and interpolates them.
PotentialField field_from_model(const ReflectionlessModel& m, double x_min = -12.0, double x_max = 12.0,
                                double h = 0.01, int threads = 1);

struct OdeOptions {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
};

/// Off-diagonal coefficients of d/dx (a1, a2) = [[-i lambda, a], [b, i lambda]] (a1, a2).
/// Both the original system (a = zeta q, b = zeta r) and the AKNS forms
/// (a = u, b = v or a = p, b = s) are of this shape.
struct OffDiagonalSystem {
  ScalarField a, b;
  double x_min, x_max;
};

OffDiagonalSystem system_for(const PotentialField& f, cplx zeta);

/// Integrates the hatted unknowns (a1 e^{i lambda x}, a2 e^{-i lambda x}),
/// which obey a1' = a e^{2 i lambda x} a2, a2' = b e^{-2 i lambda x} a1,
/// from x0 (value y0) through the points xs (monotone away from x0).
/// Returns the hatted values at xs. Throws IntegrationError on step-size
/// collapse or non-finite values.
std::vector<Vec2> integrate_hatted(const OffDiagonalSystem& sys, cplx lambda, double x0, const Vec2& y0,
                                   std::span<const double> xs, const OdeOptions& opts = {});

inline cplx wronskian(const Vec2& f, const Vec2& g) { return f(0) * g(1) - f(1) * g(0); }

struct JostEvaluation {
  cplx zeta;
  cplx lambda;
  std::vector<double> x;
  std::vector<Vec2> psi, psibar, phi, phibar;
};

/// Jost solutions on a grid inside the window (default: 201 uniform
/// points). psi, psibar start at x_max with (0, e^{i lambda x}) and
/// (e^{-i lambda x}, 0); phi, phibar start at x_min with (e^{-i lambda x}, 0)
/// and (0, e^{i lambda x}).
JostEvaluation integrate_jost(const PotentialField& f, cplx zeta, std::span<const double> grid = {},
                              const OdeOptions& opts = {});

/// Same for any off-diagonal system at spectral value lambda; zeta is
/// recorded as given (pass sqrt(lambda) when there is no natural choice).
JostEvaluation integrate_jost(const OffDiagonalSystem& sys, cplx lambda, cplx zeta, std::span<const double> grid = {},
                              const OdeOptions& opts = {});

/// The four hatted Jost solutions at x_eval, each integrated only from its
/// own end, for any system of the off-diagonal shape.
struct HattedJost {
  Vec2 psi, psibar, phi, phibar;
};
HattedJost hatted_jost_at(const OffDiagonalSystem& sys, cplx lambda, double x_eval, const OdeOptions& opts = {});

struct ScatteringCoefficients {
  cplx T, Tbar, R, Rbar, L, Lbar;
};

/// Wronskian formulas evaluated at the window midpoint. Throws DivisionError
/// when a denominator Wronskian vanishes.
ScatteringCoefficients coefficients_from_wronskians(const HattedJost& j);

/// zeta real and nonzero.
ScatteringCoefficients scattering_coefficients(const PotentialField& f, double zeta, const OdeOptions& opts = {});

struct SearchBox {
  double re_min = -4, re_max = 4;
  double im_min = 0.05, im_max = 4;
};

struct LocatedZero {
  cplx lambda;
  int multiplicity;  // capped at 4
  bool at_least;     // winding above the cap
};

struct SearchOptions {
  double min_box = 1e-3;     // boxes are not split below this size
  double newton_tol = 1e-12;
  int max_newton = 40;
  int max_boundary_samples = 4096;  // per edge
  OdeOptions ode;
};

/// Zeros of [phi; psi] (Side::plus, box in the upper half plane) or of
/// [psibar; phibar] (Side::minus, box in the lower half plane) as functions
/// of lambda. Argument principle on the box edges, quadtree splitting, then
/// Newton refinement with the winding number as multiplicity.
std::vector<LocatedZero> locate_bound_states(const PotentialField& f, const SearchBox& box, Side side,
                                             const SearchOptions& opts = {});

/// The function whose zeros are searched: 1/T or 1/Tbar at lambda.
cplx inverse_transmission(const PotentialField& f, cplx lambda, Side side, const OdeOptions& opts = {});

struct FieldInvariants {
  std::vector<double> x;
  std::vector<cplx> E;      // exp((i/2) int_{x_min}^x q r)
  std::vector<cplx> sigma;  // -(i/2) q r' + q^2 r^2 / 4
  cplx mu = 0;              // integral of q r over the window
  cplx mu_principal = 0;
};

FieldInvariants field_invariants(const PotentialField& f, std::span<const double> grid);

/// E(x) as a callable: cumulative integral on a fine uniform grid, then
/// cubic interpolation.
ScalarField E_function(const PotentialField& f, double h = 0.005);

}  // namespace marchenko
