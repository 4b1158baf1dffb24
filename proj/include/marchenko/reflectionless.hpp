#pragma once

#include <functional>
#include <span>
#include <vector>

#include "marchenko/bound_states.hpp"
#include "marchenko/linalg.hpp"

namespace marchenko {

struct EngineOptions {
  double condition_cap = kDefaultConditionCap;
  double quad_abs_tol = 1e-10;
  double tail_tol = 1e-16;  // |Q| below which the tails are dropped
};

/// Triplet pair plus the Gram matrices M (plus x minus) and Mbar
/// (minus x plus) solving
///   i M Abar - i A M = B Cbar,   i Abar Mbar - i Mbar A = Bbar C.
/// x_lo / x_hi bracket the region where Q = g1 - g2 is above tail_tol;
/// x_lo is -inf when Q does not decay to the left.
struct ReflectionlessModel {
  MatrixTriplet plus;
  MatrixTriplet minus;
  CMatrix M;
  CMatrix Mbar;
  EngineOptions options;
  double x_lo = 0;
  double x_hi = 0;

  bool empty() const { return plus.size() == 0 && minus.size() == 0; }
};

ReflectionlessModel build_model(const MatrixTriplet& plus, const MatrixTriplet& minus, EngineOptions opts = {});

struct GammaPair {
  double x;
  CMatrix Gamma;
  CMatrix GammaBar;
  /// Condition of the bordered systems that apply Gamma^{-1} and
  /// GammaBar^{-1}; these blow up exactly where Gamma or GammaBar is singular.
  double condition;
  double condition_bar;
};

GammaPair gamma_pair(const ReflectionlessModel& m, double x);

/// Row vectors that every closed-form quantity at x is built from:
///   w    = C e^{iAx} Gamma^{-1} e^{iAx}
///   t    = w M Abar e^{-2i Abar x}
///   wbar = Cbar e^{-i Abar x} GammaBar^{-1} e^{-i Abar x}
///   tbar = wbar Mbar A e^{2iAx}
/// They are obtained from bordered linear systems whose entries are single
/// exponentials, never products of growing ones, so the evaluation stays
/// accurate for large |x|.
struct KernelRows {
  double x;
  Eigen::RowVectorXcd w, t, wbar, tbar;
  double condition, condition_bar;
};

/// Throws SingularMatrixError (with x) when a bordered system exceeds the cap.
KernelRows kernel_rows(const ReflectionlessModel& m, double x);

struct KernelQuadruple {
  cplx K1, K2, K1bar, K2bar;
};

KernelQuadruple kernels(const ReflectionlessModel& m, double x, double y);

struct GPair {
  cplx g1, g2;
};

GPair g_functions(const ReflectionlessModel& m, double x);

/// Q(x) = g1(x) - g2(x).
cplx q_density(const ReflectionlessModel& m, double x);

/// G(x) = integral of Q over [x, +inf).
cplx G_of_x(const ReflectionlessModel& m, double x);

struct PotentialPair {
  cplx q, r;
};

PotentialPair potentials(const ReflectionlessModel& m, double x);

/// q, r and their x-derivatives, from the bordered systems and their
/// derivatives.
struct PotentialJet {
  cplx q, r, dq, dr;
};

PotentialJet potential_jet(const ReflectionlessModel& m, double x, cplx G);

struct PotentialSamples {
  std::vector<double> x;
  std::vector<cplx> q, r, dq, dr, G;
};

/// Potentials on a sorted grid; G is accumulated panel by panel from the
/// right instead of being re-integrated per point.
PotentialSamples sample_potentials(const ReflectionlessModel& m, std::span<const double> xs, int threads = 1);

/// Representative of mu with real part in (-2 pi, 2 pi], with a 1e-5
/// allowance at the lower edge. Every formula in the toolkit depends on mu
/// only through e^{i mu / 2}, which is 4 pi periodic.
cplx principal_mu(cplx mu);

struct EMu {
  std::function<cplx(double)> E;
  cplx mu;            // integral of q r over the real line
  cplx mu_principal;  // principal_mu(mu)
  cplx phase;         // e^{i mu / 2}
  cplx E_plus_inf;    // E at the right cutoff, for the consistency check
};

/// Throws IntegrationError when Q does not decay to the left (unequal sizes).
EMu E_and_mu(const ReflectionlessModel& m);

struct JostPair {
  Eigen::Vector2cd psi;
  Eigen::Vector2cd psibar;
};

JostPair jost(const ReflectionlessModel& m, cplx zeta, double x);

/// Same as jost() with G(x) supplied, for sweeps over a grid.
JostPair jost(const ReflectionlessModel& m, cplx zeta, double x, cplx G);

struct TransmissionPair {
  cplx T, Tbar;
};

/// e^{-i mu/2} det(lambda - Abar) / det(lambda - A) and its reciprocal.
TransmissionPair transmissions(const ReflectionlessModel& m, cplx zeta);
TransmissionPair transmissions(const ReflectionlessModel& m, cplx zeta, cplx phase);

/// T = e^{-2 int Q} / g4(zeta, -inf), Tbar = e^{2 int Q} / g5(zeta, -inf),
/// with the limit read off a plateau of g4, g5 at large negative x.
TransmissionPair transmissions_limit(const ReflectionlessModel& m, cplx zeta);

}  // namespace marchenko
