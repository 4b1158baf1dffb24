#include "marchenko/akns.hpp"

#include <cmath>

#include "marchenko/errors.hpp"

namespace marchenko {

namespace {

using Mat2 = Eigen::Matrix2cd;

// Lower-triangular factor of the uv map, scaled so that its (0,0) entry is
// zeta E; the other uv factor is this one divided by zeta.
Mat2 uv_factor(cplx zeta, cplx E, cplx r) {
  Mat2 m;
  m << zeta * E, 0.0, 0.5 * I_unit * r * E, 1.0 / E;
  return m;
}

// Upper-triangular factor of the ps map with (1,1) entry 1/E; the other ps
// factor is this one times zeta.
Mat2 ps_factor(cplx zeta, cplx E, cplx q) {
  Mat2 m;
  m << E / zeta, -0.5 * I_unit * q / (zeta * E), 0.0, 1.0 / E;
  return m;
}

void require_nonzero(cplx zeta, const char* what) {
  if (zeta == 0.0) throw BranchPointError(std::string(what) + " is singular at lambda = 0");
}

}  // namespace

AknsField to_akns(const PotentialField& f, AknsFlavor flavor, double E_step) {
  const ScalarField E = E_function(f, E_step);
  AknsField a;
  a.flavor = flavor;
  a.x_min = f.x_min;
  a.x_max = f.x_max;
  if (flavor == AknsFlavor::uv) {
    a.first = [f, E](double x) {
      const cplx e = E(x);
      return f.q_at(x) / (e * e);
    };
    a.second = [f, E](double x) {
      const cplx e = E(x), q = f.q_at(x), r = f.r_at(x);
      return (-0.5 * I_unit * f.dr_at(x) + 0.25 * q * r * r) * e * e;
    };
  } else {
    a.first = [f, E](double x) {
      const cplx e = E(x), q = f.q_at(x), r = f.r_at(x);
      return (0.5 * I_unit * f.dq_at(x) + 0.25 * q * q * r) / (e * e);
    };
    a.second = [f, E](double x) {
      const cplx e = E(x);
      return f.r_at(x) * e * e;
    };
  }
  return a;
}

OffDiagonalSystem akns_system(const AknsField& a) { return {a.first, a.second, a.x_min, a.x_max}; }

JostEvaluation akns_jost(const AknsField& a, cplx lambda, std::span<const double> grid, const OdeOptions& opts) {
  return integrate_jost(akns_system(a), lambda, std::sqrt(lambda), grid, opts);
}

JostEvaluation map_jost(const JostEvaluation& jost, const PotentialField& f, AknsFlavor flavor,
                        MapDirection direction) {
  const cplx zeta = jost.zeta;
  require_nonzero(zeta, "Jost-solution map");
  const auto inv = field_invariants(f, jost.x);
  const cplx phase = std::exp(0.5 * I_unit * inv.mu);
  const bool forward = direction == MapDirection::from_akns;

  JostEvaluation out = jost;
  for (std::size_t k = 0; k < jost.x.size(); ++k) {
    const double x = jost.x[k];
    const cplx E = inv.E[k];
    // psi and phibar use F1, psibar and phi use F2.
    Mat2 F1, F2;
    if (flavor == AknsFlavor::uv) {
      F1 = uv_factor(zeta, E, f.r_at(x));
      F2 = F1 / zeta;
    } else {
      F1 = ps_factor(zeta, E, f.q_at(x));
      F2 = F1 * zeta;
    }
    const Mat2 psi_m = phase * F1, psibar_m = F2 / phase;
    if (forward) {
      out.psi[k] = psi_m * jost.psi[k];
      out.psibar[k] = psibar_m * jost.psibar[k];
      out.phi[k] = F2 * jost.phi[k];
      out.phibar[k] = F1 * jost.phibar[k];
    } else {
      out.psi[k] = psi_m.inverse() * jost.psi[k];
      out.psibar[k] = psibar_m.inverse() * jost.psibar[k];
      out.phi[k] = F2.inverse() * jost.phi[k];
      out.phibar[k] = F1.inverse() * jost.phibar[k];
    }
  }
  return out;
}

AknsScattering akns_coefficients(const AknsField& a, double lambda, const OdeOptions& opts) {
  const auto sys = akns_system(a);
  const auto c = coefficients_from_wronskians(hatted_jost_at(sys, lambda, 0.5 * (a.x_min + a.x_max), opts));
  return {a.flavor, lambda, c.T, c.Tbar, c.R, c.Rbar, c.L, c.Lbar};
}

AknsScattering to_akns_scattering(const ScatteringCoefficients& c, cplx zeta, AknsFlavor flavor, cplx phase) {
  require_nonzero(zeta, "scattering dictionary");
  const cplx p2 = phase * phase;
  AknsScattering a;
  a.flavor = flavor;
  a.lambda = zeta * zeta;
  a.T = phase * c.T;
  a.Tbar = c.Tbar / phase;
  if (flavor == AknsFlavor::uv) {
    a.R = p2 * zeta * c.R;
    a.Rbar = c.Rbar / (p2 * zeta);
    a.L = c.L / zeta;
    a.Lbar = zeta * c.Lbar;
  } else {
    a.R = p2 * c.R / zeta;
    a.Rbar = zeta * c.Rbar / p2;
    a.L = zeta * c.L;
    a.Lbar = c.Lbar / zeta;
  }
  return a;
}

ScatteringCoefficients from_akns_scattering(const AknsScattering& a, cplx zeta, cplx T0) {
  require_nonzero(zeta, "scattering dictionary");
  if (std::abs(T0) < 1e-300 || !std::isfinite(std::abs(T0)))
    throw NormalizationError("AKNS transmission coefficient at lambda = 0 vanishes");
  const cplx p2 = T0 * T0;
  ScatteringCoefficients c;
  c.T = a.T / T0;
  c.Tbar = a.Tbar * T0;
  if (a.flavor == AknsFlavor::uv) {
    c.R = a.R / (zeta * p2);
    c.Rbar = zeta * p2 * a.Rbar;
    c.L = zeta * a.L;
    c.Lbar = a.Lbar / zeta;
  } else {
    c.R = zeta * a.R / p2;
    c.Rbar = p2 * a.Rbar / zeta;
    c.L = a.L / zeta;
    c.Lbar = zeta * a.Lbar;
  }
  return c;
}

}  // namespace marchenko
