#pragma once

#include "marchenko/direct.hpp"

namespace marchenko {

/// uv: d/dx (a, b) = [[-i lambda, u], [v, i lambda]] (a, b)
/// ps: the same shape with p, s.
enum class AknsFlavor { uv, ps };

/// first = u or p, second = v or s, on the window of the source field.
struct AknsField {
  AknsFlavor flavor = AknsFlavor::uv;
  ScalarField first, second;
  double x_min = -12.0, x_max = 12.0;
};

/// u = q E^-2, v = (-(i/2) r' + q r^2 / 4) E^2, or
/// p = ((i/2) q' + q^2 r / 4) E^-2, s = r E^2,
/// with E from quadrature of q r on the field's window.
AknsField to_akns(const PotentialField& f, AknsFlavor flavor, double E_step = 0.005);

OffDiagonalSystem akns_system(const AknsField& a);

/// Jost solutions of the AKNS system on a grid; zeta is recorded as the
/// principal sqrt(lambda).
JostEvaluation akns_jost(const AknsField& a, cplx lambda, std::span<const double> grid = {},
                         const OdeOptions& opts = {});

enum class MapDirection { to_akns, from_akns };

/// Applies the triangular x-dependent factors linking the Jost solutions of
/// the original system to those of the AKNS system, in either direction.
/// sqrt(lambda) is taken as jost.zeta, so the original-system branch is
/// kept. E(x) and e^{i mu / 2} come from field_invariants on the field.
/// Throws BranchPointError at lambda = 0.
JostEvaluation map_jost(const JostEvaluation& jost, const PotentialField& f, AknsFlavor flavor,
                        MapDirection direction);

struct AknsScattering {
  AknsFlavor flavor = AknsFlavor::uv;
  cplx lambda = 0;
  cplx T, Tbar, R, Rbar, L, Lbar;
};

/// AKNS coefficients at real lambda (zero allowed) from Wronskians at the
/// window midpoint.
AknsScattering akns_coefficients(const AknsField& a, double lambda, const OdeOptions& opts = {});

/// Original coefficients at zeta to AKNS coefficients at lambda = zeta^2,
/// given phase = e^{i mu / 2}. Throws BranchPointError at zeta = 0.
AknsScattering to_akns_scattering(const ScatteringCoefficients& c, cplx zeta, AknsFlavor flavor, cplx phase);

/// Inverse dictionary with e^{i mu / 2} taken as T0 = the AKNS transmission
/// coefficient at lambda = 0. Throws NormalizationError when T0 vanishes,
/// BranchPointError at zeta = 0.
ScatteringCoefficients from_akns_scattering(const AknsScattering& a, cplx zeta, cplx T0);

}  // namespace marchenko
