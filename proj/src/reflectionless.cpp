#include "marchenko/reflectionless.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "marchenko/errors.hpp"
#include "marchenko/quadrature.hpp"

namespace marchenko {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Largest |Im| over the eigenvalues (diagonals, since A is triangular in the
// intended use; general matrices fall back to an eigen solve).
double max_growth(const CMatrix& A) {
  double g = 0;
  if (A.rows() == 0) return 0;
  if (is_jordan_form(A)) {
    for (Eigen::Index k = 0; k < A.rows(); ++k) g = std::max(g, std::abs(A(k, k).imag()));
  } else {
    const Eigen::ComplexEigenSolver<CMatrix> es(A, false);
    for (Eigen::Index k = 0; k < A.rows(); ++k) g = std::max(g, std::abs(es.eigenvalues()(k).imag()));
  }
  return g;
}

struct Bordered {
  CMatrix Xm2;  // e^{-2iAx}
  CMatrix Ym2;  // e^{2i Abar x}
  CMatrix P;    // [[Xm2, M Abar], [-Mbar, -Ym2]]
  CMatrix Pbar; // [[Ym2, Mbar A], [-M, -Xm2]]
};

Bordered bordered(const ReflectionlessModel& m, double x) {
  const Eigen::Index n = m.plus.size(), nb = m.minus.size();
  Bordered b;
  b.Xm2 = mat_exp(m.plus.A, cplx(0, -2.0 * x));
  b.Ym2 = mat_exp(m.minus.A, cplx(0, 2.0 * x));
  b.P = CMatrix::Zero(n + nb, n + nb);
  b.P.topLeftCorner(n, n) = b.Xm2;
  b.P.topRightCorner(n, nb) = m.M * m.minus.A;
  b.P.bottomLeftCorner(nb, n) = -m.Mbar;
  b.P.bottomRightCorner(nb, nb) = -b.Ym2;
  b.Pbar = CMatrix::Zero(n + nb, n + nb);
  b.Pbar.topLeftCorner(nb, nb) = b.Ym2;
  b.Pbar.topRightCorner(nb, n) = m.Mbar * m.plus.A;
  b.Pbar.bottomLeftCorner(n, nb) = -m.M;
  b.Pbar.bottomRightCorner(n, n) = -b.Xm2;
  return b;
}

// Row vector v with v * P = rhs.
Eigen::RowVectorXcd left_solve(const CMatrix& P, const Eigen::RowVectorXcd& rhs, double& cond) {
  const CMatrix sol = equilibrated_solve(P.transpose(), rhs.transpose(), cond);
  return sol.col(0).transpose();
}

bool beyond_overflow(const ReflectionlessModel& m, double x) {
  // e^{-2iAx} and e^{2i Abar x} overflow for large positive x, where all
  // kernel rows are zero to double precision anyway.
  const double g = std::max(max_growth(m.plus.A), max_growth(m.minus.A));
  return x > 0 && 2.0 * g * x > 600.0;
}

struct RowsWithDerivative {
  KernelRows rows;
  Eigen::RowVectorXcd dw, dwbar;
};

RowsWithDerivative rows_impl(const ReflectionlessModel& m, double x, bool derivative) {
  const Eigen::Index n = m.plus.size(), nb = m.minus.size();
  RowsWithDerivative out;
  KernelRows& r = out.rows;
  r.x = x;
  r.condition = r.condition_bar = 1.0;
  if (beyond_overflow(m, x)) {
    r.w = Eigen::RowVectorXcd::Zero(n);
    r.t = Eigen::RowVectorXcd::Zero(nb);
    r.wbar = Eigen::RowVectorXcd::Zero(nb);
    r.tbar = Eigen::RowVectorXcd::Zero(n);
    out.dw = r.w;
    out.dwbar = r.wbar;
    return out;
  }
  const Bordered b = bordered(m, x);

  Eigen::RowVectorXcd rhs = Eigen::RowVectorXcd::Zero(n + nb);
  rhs.head(n) = m.plus.C;
  const Eigen::RowVectorXcd v = left_solve(b.P, rhs, r.condition);
  r.w = v.head(n);
  r.t = v.tail(nb);

  Eigen::RowVectorXcd rhsb = Eigen::RowVectorXcd::Zero(n + nb);
  rhsb.head(nb) = m.minus.C;
  const Eigen::RowVectorXcd vb = left_solve(b.Pbar, rhsb, r.condition_bar);
  r.wbar = vb.head(nb);
  r.tbar = vb.tail(n);

  const double worst = std::max(r.condition, r.condition_bar);
  if (!(worst <= m.options.condition_cap) || !v.allFinite() || !vb.allFinite())
    throw SingularMatrixError("Gamma(x) is numerically singular at x = " + std::to_string(x) + " (condition " +
                                  std::to_string(worst) + ")",
                              worst, x);

  if (derivative) {
    // d/dx (v P) = 0  =>  v' P = -v P'.
    CMatrix dP = CMatrix::Zero(n + nb, n + nb);
    dP.topLeftCorner(n, n) = -2.0 * I_unit * m.plus.A * b.Xm2;
    dP.bottomRightCorner(nb, nb) = -2.0 * I_unit * m.minus.A * b.Ym2;
    double c = 0;
    const Eigen::RowVectorXcd dv = left_solve(b.P, -(v * dP), c);
    out.dw = dv.head(n);

    CMatrix dPbar = CMatrix::Zero(n + nb, n + nb);
    dPbar.topLeftCorner(nb, nb) = 2.0 * I_unit * m.minus.A * b.Ym2;
    dPbar.bottomRightCorner(n, n) = 2.0 * I_unit * m.plus.A * b.Xm2;
    const Eigen::RowVectorXcd dvb = left_solve(b.Pbar, -(vb * dPbar), c);
    out.dwbar = dvb.head(nb);
  }
  return out;
}

cplx dot(const Eigen::RowVectorXcd& row, const CMatrix& col) {
  if (row.size() == 0) return 0.0;
  return (row * col)(0, 0);
}

// Marches outward from 0 in unit steps until |Q| < tail_tol at two
// consecutive points. Returns +-inf when that never happens within `limit`.
double find_cutoff(const ReflectionlessModel& m, double direction, double limit) {
  int quiet = 0;
  for (double z = 0; std::abs(z) <= limit; z += direction) {
    cplx Q;
    double floor = m.options.tail_tol;
    try {
      const auto g = g_functions(m, z);
      Q = g.g1 - g.g2;
      // g1 and g2 need not decay separately; their difference then bottoms
      // out at rounding level rather than at zero.
      floor = std::max(floor, 64 * std::numeric_limits<double>::epsilon() * (std::abs(g.g1) + std::abs(g.g2)));
    } catch (const SingularMatrixError&) {
      if (direction < 0 && std::abs(z) > 4) return direction * kInf;
      quiet = 0;
      continue;
    }
    if (std::abs(Q) < floor) {
      if (++quiet == 2) return z;
    } else {
      quiet = 0;
    }
  }
  return direction * kInf;
}

}  // namespace

ReflectionlessModel build_model(const MatrixTriplet& plus, const MatrixTriplet& minus, EngineOptions opts) {
  check_shapes(plus, "plus");
  check_shapes(minus, "minus");
  ReflectionlessModel m;
  m.plus = plus;
  m.minus = minus;
  m.options = opts;
  m.M = solve_sylvester(plus.A, minus.A, plus.B, minus.C, opts.condition_cap);
  // i Abar Mbar - i Mbar A = Bbar C  <=>  i Mbar A - i Abar Mbar = -Bbar C.
  m.Mbar = solve_sylvester(minus.A, plus.A, -minus.B, plus.C, opts.condition_cap);
  if (m.empty()) {
    m.x_lo = m.x_hi = 0;
    return m;
  }
  m.x_hi = find_cutoff(m, +1.0, 200.0);
  m.x_lo = find_cutoff(m, -1.0, 200.0);
  if (!std::isfinite(m.x_hi)) throw IntegrationError("Q does not decay as x -> +inf", 200.0);
  return m;
}

KernelRows kernel_rows(const ReflectionlessModel& m, double x) { return rows_impl(m, x, false).rows; }

GammaPair gamma_pair(const ReflectionlessModel& m, double x) {
  GammaPair g;
  g.x = x;
  const Eigen::Index n = m.plus.size(), nb = m.minus.size();
  const CMatrix eA = mat_exp(m.plus.A, cplx(0, x));
  const CMatrix eAb = mat_exp(m.minus.A, cplx(0, -x));
  g.Gamma = CMatrix::Identity(n, n) - eA * m.M * m.minus.A * eAb * eAb * m.Mbar * eA;
  g.GammaBar = CMatrix::Identity(nb, nb) - eAb * m.Mbar * m.plus.A * eA * eA * m.M * eAb;
  if (m.empty() || beyond_overflow(m, x)) {
    g.condition = g.condition_bar = 1.0;
    return g;
  }
  const Bordered b = bordered(m, x);
  g.condition = condition_estimate(b.P);
  g.condition_bar = condition_estimate(b.Pbar);
  return g;
}

KernelQuadruple kernels(const ReflectionlessModel& m, double x, double y) {
  if (m.empty()) return {0.0, 0.0, 0.0, 0.0};
  const KernelRows r = kernel_rows(m, x);
  const double s = y - x;
  const CMatrix eA = mat_exp(m.plus.A, cplx(0, s));
  const CMatrix eAb = mat_exp(m.minus.A, cplx(0, -s));
  KernelQuadruple k;
  k.K1 = -dot(r.wbar, eAb * m.minus.B);
  k.K2 = dot(r.t, eAb * m.minus.B);
  k.K1bar = dot(r.tbar, eA * m.plus.B);
  k.K2bar = -dot(r.w, eA * m.plus.B);
  return k;
}

GPair g_functions(const ReflectionlessModel& m, double x) {
  if (m.empty()) return {0.0, 0.0};
  const KernelRows r = kernel_rows(m, x);
  return {dot(r.tbar, m.plus.B), dot(r.t, m.minus.B)};
}

cplx q_density(const ReflectionlessModel& m, double x) {
  const GPair g = g_functions(m, x);
  return g.g1 - g.g2;
}

cplx G_of_x(const ReflectionlessModel& m, double x) {
  if (m.empty() || x >= m.x_hi) return 0.0;
  return integrate_panels([&](double z) { return q_density(m, z); }, x, m.x_hi, m.options.quad_abs_tol);
}

PotentialJet potential_jet(const ReflectionlessModel& m, double x, cplx G) {
  if (m.empty()) return {0.0, 0.0, 0.0, 0.0};
  const RowsWithDerivative rd = rows_impl(m, x, true);
  const KernelRows& r = rd.rows;
  const cplx S = dot(r.w, m.plus.B), Sbar = dot(r.wbar, m.minus.B);
  const cplx dS = dot(rd.dw, m.plus.B), dSbar = dot(rd.dwbar, m.minus.B);
  const cplx Q = dot(r.tbar, m.plus.B) - dot(r.t, m.minus.B);
  const cplx em = std::exp(-4.0 * G), ep = std::exp(4.0 * G);
  // G' = -Q.
  return {2.0 * Sbar * em, 2.0 * S * ep, 2.0 * em * (dSbar + 4.0 * Q * Sbar), 2.0 * ep * (dS - 4.0 * Q * S)};
}

PotentialPair potentials(const ReflectionlessModel& m, double x) {
  if (m.empty()) return {0.0, 0.0};
  const cplx G = G_of_x(m, x);
  const KernelRows r = kernel_rows(m, x);
  return {2.0 * dot(r.wbar, m.minus.B) * std::exp(-4.0 * G), 2.0 * dot(r.w, m.plus.B) * std::exp(4.0 * G)};
}

PotentialSamples sample_potentials(const ReflectionlessModel& m, std::span<const double> xs, int threads) {
  PotentialSamples s;
  const std::size_t N = xs.size();
  s.x.assign(xs.begin(), xs.end());
  s.q.resize(N);
  s.r.resize(N);
  s.dq.resize(N);
  s.dr.resize(N);
  s.G.assign(N, 0.0);
  for (std::size_t k = 1; k < N; ++k)
    if (!(xs[k] > xs[k - 1])) throw DimensionError("sample grid must be strictly increasing");
  if (N == 0) return s;
  if (!m.empty()) {
    const auto Q = [&](double z) { return q_density(m, z); };
    s.G[N - 1] = G_of_x(m, xs[N - 1]);
    std::vector<cplx> pieces(N, 0.0);
    parallel_for(static_cast<int>(N) - 1, threads, [&](int k) {
      const double a = xs[k], b = std::min(xs[k + 1], std::max(m.x_hi, a));
      if (a < m.x_hi) pieces[k] = integrate(Q, a, b, m.options.quad_abs_tol, 1e-10);
    });
    for (std::size_t k = N - 1; k-- > 0;) s.G[k] = s.G[k + 1] + pieces[k];
  }
  parallel_for(static_cast<int>(N), threads, [&](int k) {
    const PotentialJet j = potential_jet(m, xs[k], s.G[k]);
    s.q[k] = j.q;
    s.r[k] = j.r;
    s.dq[k] = j.dq;
    s.dr[k] = j.dr;
  });
  return s;
}

cplx principal_mu(cplx mu) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double re = mu.real() - 2.0 * two_pi * std::round(mu.real() / (2.0 * two_pi));
  // Values within eps of the lower edge are taken to the upper edge, so
  // numerically computed mu near Re = 2 pi does not flip sign.
  const double eps = 1e-5;
  if (re <= -two_pi + eps) re += 2.0 * two_pi;
  if (re > two_pi + eps) re -= 2.0 * two_pi;
  return {re, mu.imag()};
}

EMu E_and_mu(const ReflectionlessModel& m) {
  EMu out;
  if (m.empty()) {
    out.E = [](double) { return cplx(1.0); };
    out.mu = out.mu_principal = 0.0;
    out.phase = out.E_plus_inf = 1.0;
    return out;
  }
  if (!std::isfinite(m.x_lo))
    throw IntegrationError("Q = g1 - g2 does not decay as x -> -inf; mu is undefined for this pair", -200.0);
  const auto Q = [&](double z) { return q_density(m, z); };
  const double tol = m.options.quad_abs_tol;
  // Whole-line integral split at 0; E is accumulated separately from the
  // left in unit panels, so E(+inf) = e^{i mu/2} is a genuine cross-check.
  cplx total = 0.0;
  if (m.x_lo < 0) total += integrate(Q, m.x_lo, std::min(0.0, m.x_hi), tol, 1e-10);
  if (m.x_hi > 0) total += integrate(Q, std::max(0.0, m.x_lo), m.x_hi, tol, 1e-10);
  out.mu = -4.0 * I_unit * total;
  out.mu_principal = principal_mu(out.mu);
  out.phase = std::exp(2.0 * total);
  const ReflectionlessModel copy = m;
  out.E = [copy](double x) -> cplx {
    if (x <= copy.x_lo) return 1.0;
    const double b = std::min(x, copy.x_hi);
    const cplx I = integrate_panels([&](double z) { return q_density(copy, z); }, copy.x_lo, b,
                                    copy.options.quad_abs_tol);
    return std::exp(2.0 * I);
  };
  out.E_plus_inf = out.E(m.x_hi);
  return out;
}

namespace {

CMatrix resolvent_column(const CMatrix& A, const CMatrix& B, cplx lambda, double cap, const char* which) {
  const Eigen::Index n = A.rows();
  if (n == 0) return CMatrix(0, 1);
  double cond = 1;
  const CMatrix S = A - lambda * CMatrix::Identity(n, n);
  const CMatrix y = equilibrated_solve(S, B, cond);
  // A - lambda is triangular for Jordan input, so a tiny diagonal entry is
  // the clearest collision signal.
  double dmin = kInf;
  for (Eigen::Index k = 0; k < n; ++k) dmin = std::min(dmin, std::abs(S(k, k)));
  if (!(cond <= cap) || !y.allFinite() || (is_jordan_form(A) && dmin < 1e-13 * (1 + std::abs(lambda))))
    throw SpectralCollisionError(std::string("lambda coincides with an eigenvalue of ") + which);
  return y;
}

}  // namespace

JostPair jost(const ReflectionlessModel& m, cplx zeta, double x, cplx G) {
  const cplx lam = zeta * zeta;
  JostPair j;
  const cplx ep = std::exp(I_unit * lam * x), em = std::exp(-I_unit * lam * x);
  if (m.empty()) {
    j.psi << 0.0, ep;
    j.psibar << em, 0.0;
    return j;
  }
  const KernelRows r = kernel_rows(m, x);
  const CMatrix ya = resolvent_column(m.plus.A, m.plus.B, lam, m.options.condition_cap, "A");
  const CMatrix yb = resolvent_column(m.minus.A, m.minus.B, lam, m.options.condition_cap, "Abar");
  const cplx g3 = I_unit * dot(r.wbar, yb);
  const cplx g4 = 1.0 - I_unit * dot(r.t, yb);
  const cplx g5 = 1.0 + I_unit * dot(r.tbar, ya);
  const cplx g6 = -I_unit * dot(r.w, ya);
  const cplx eG2 = std::exp(2.0 * G), emG2 = std::exp(-2.0 * G);
  j.psi << zeta * ep * g3 * emG2, ep * g4 * eG2;
  j.psibar << em * g5 * emG2, zeta * em * g6 * eG2;
  return j;
}

JostPair jost(const ReflectionlessModel& m, cplx zeta, double x) { return jost(m, zeta, x, G_of_x(m, x)); }

TransmissionPair transmissions(const ReflectionlessModel& m, cplx zeta, cplx phase) {
  const cplx lam = zeta * zeta;
  auto charpoly = [&](const CMatrix& A) -> cplx {
    if (A.rows() == 0) return 1.0;
    return (lam * CMatrix::Identity(A.rows(), A.rows()) - A).determinant();
  };
  auto near_eig = [&](const CMatrix& A) {
    if (A.rows() == 0) return false;
    const Eigen::ComplexEigenSolver<CMatrix> es(A, false);
    for (Eigen::Index k = 0; k < A.rows(); ++k)
      if (std::abs(es.eigenvalues()(k) - lam) < 1e-12 * (1 + std::abs(lam))) return true;
    return false;
  };
  if (near_eig(m.plus.A)) throw SpectralCollisionError("lambda is a pole of T (eigenvalue of A)");
  if (near_eig(m.minus.A)) throw SpectralCollisionError("lambda is a pole of Tbar (eigenvalue of Abar)");
  const cplx T = charpoly(m.minus.A) / charpoly(m.plus.A) / phase;
  return {T, 1.0 / T};
}

TransmissionPair transmissions(const ReflectionlessModel& m, cplx zeta) {
  return transmissions(m, zeta, E_and_mu(m).phase);
}

TransmissionPair transmissions_limit(const ReflectionlessModel& m, cplx zeta) {
  if (m.empty()) return {1.0, 1.0};
  const EMu em = E_and_mu(m);
  const cplx lam = zeta * zeta;
  const CMatrix ya = resolvent_column(m.plus.A, m.plus.B, lam, m.options.condition_cap, "A");
  const CMatrix yb = resolvent_column(m.minus.A, m.minus.B, lam, m.options.condition_cap, "Abar");
  auto g45 = [&](double x) {
    const KernelRows r = kernel_rows(m, x);
    return std::pair<cplx, cplx>{1.0 - I_unit * dot(r.t, yb), 1.0 + I_unit * dot(r.tbar, ya)};
  };
  for (double X = std::max(8.0, std::abs(m.x_lo)); X <= 60.0; X += 4.0) {
    const auto a = g45(-X), b = g45(-X - 1.0);
    const double tol = 1e-6;
    if (std::abs(a.first - b.first) <= tol * std::max(1.0, std::abs(b.first)) &&
        std::abs(a.second - b.second) <= tol * std::max(1.0, std::abs(b.second))) {
      if (b.first == 0.0 || b.second == 0.0) throw SpectralCollisionError("g4 or g5 vanishes at -inf");
      return {1.0 / (em.phase * b.first), em.phase / b.second};
    }
  }
  throw IntegrationError("g4, g5 did not reach a plateau as x -> -inf", -60.0);
}

}  // namespace marchenko
