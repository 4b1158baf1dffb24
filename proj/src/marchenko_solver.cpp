#include "marchenko/marchenko_solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "marchenko/errors.hpp"
#include "marchenko/quadrature.hpp"

namespace marchenko {

namespace {

std::vector<double> grid_weights(GridRule rule, int n, double h) {
  switch (rule) {
    case GridRule::boole: return boole_weights(n, h);
    case GridRule::gregory: return gregory_weights(n, h, 8);
    default: return simpson_weights(n, h);
  }
}

// Independent rule on the same nodes for the residual check.
std::vector<double> check_weights(GridRule rule, int n, double h) {
  if (rule != GridRule::gregory && n >= 16) return gregory_weights(n, h, 8);
  if (n % 4 == 0) return boole_weights(n, h);
  return simpson_weights(n, h);
}

double max_abs(const std::vector<cplx>& v) {
  double m = 0;
  for (const auto& z : v) m = std::max(m, std::abs(z));
  return m;
}

// Hankel matrix H(l, k) = s[l + k] scaled by w_l w_k.
CMatrix weighted_hankel(const std::vector<cplx>& s, const std::vector<double>& w, int n1) {
  CMatrix H(n1, n1);
  for (int l = 0; l < n1; ++l)
    for (int k = 0; k < n1; ++k) H(l, k) = w[l] * s[l + k] * w[k];
  return H;
}

CMatrix hankel(const std::vector<cplx>& s, int n1) {
  CMatrix H(n1, n1);
  for (int l = 0; l < n1; ++l)
    for (int k = 0; k < n1; ++k) H(l, k) = s[l + k];
  return H;
}

CVector head(const std::vector<cplx>& s, int n1) {
  CVector v(n1);
  for (int j = 0; j < n1; ++j) v(j) = s[j];
  return v;
}

std::vector<cplx> to_std(const CVector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

NumericKernelSolution solve_at(const OmegaKernel& omega, double x, const GridConfig& grid) {
  const int n = grid.n;
  const int n1 = n + 1;
  if (!(grid.L > 0)) throw ValidationError("grid length L must be positive");
  const double h = grid.L / n;

  NumericKernelSolution sol;
  sol.x = x;
  sol.rule = grid.rule;
  sol.y.resize(n1);
  for (int j = 0; j < n1; ++j) sol.y[j] = x + j * h;
  sol.weights = grid_weights(grid.rule, n, h);

  // Every entry needed is Omega-type at 2x + m h, m = 0..2n.
  const auto s = omega.sample(2 * x, h, 2 * n + 1);

  for (const auto* v : {&s.omega, &s.omega_bar}) {
    const double peak = max_abs(*v);
    if (peak > 0 && std::abs((*v)[n]) > grid.truncation_tol * peak)
      throw TruncationError("kernel tail not negligible at 2x + L = " + std::to_string(2 * x + grid.L) +
                            " (ratio " + std::to_string(std::abs((*v)[n]) / peak) + "); increase L");
  }

  const auto& w = sol.weights;
  CVector wv(n1);
  for (int j = 0; j < n1; ++j) wv(j) = w[j];

  // k1 (I + i W P W Qbar) = -omegabar, transposed using Hankel symmetry.
  const CMatrix Qbar = hankel(s.omega_bar, n1);
  const CMatrix WPW = weighted_hankel(s.d_omega, w, n1);
  CMatrix sys1 = CMatrix::Identity(n1, n1) + I_unit * (Qbar * WPW);
  const CVector rhs1 = -head(s.omega_bar, n1);
  double c1 = 1;
  const CVector k1 = equilibrated_solve(sys1, rhs1, c1).col(0);

  // k2bar (I - i W Pbar W Q) = -omega.
  const CMatrix Q = hankel(s.omega, n1);
  const CMatrix WPbW = weighted_hankel(s.d_omega_bar, w, n1);
  CMatrix sys2 = CMatrix::Identity(n1, n1) - I_unit * (Q * WPbW);
  const CVector rhs2 = -head(s.omega, n1);
  double c2 = 1;
  const CVector k2b = equilibrated_solve(sys2, rhs2, c2).col(0);

  sol.condition = std::max(c1, c2);
  if (!(sol.condition <= grid.condition_cap))
    throw ConditioningError("Marchenko system ill-conditioned at x = " + std::to_string(x), sol.condition);

  const double r1 = (sys1 * k1 - rhs1).norm() / std::max(rhs1.norm(), 1e-300);
  const double r2 = (sys2 * k2b - rhs2).norm() / std::max(rhs2.norm(), 1e-300);
  sol.residual = std::max(rhs1.norm() > 0 ? r1 : 0.0, rhs2.norm() > 0 ? r2 : 0.0);

  // K1bar(x, y) = i int K1(x, z) Omega'(z + y) dz,
  // K2(x, y) = -i int K2bar(x, z) OmegaBar'(z + y) dz.
  const CMatrix P = hankel(s.d_omega, n1);
  const CMatrix Pb = hankel(s.d_omega_bar, n1);
  const CVector k1b = I_unit * (P * wv.cwiseProduct(k1));
  const CVector k2 = -I_unit * (Pb * wv.cwiseProduct(k2b));

  sol.K1 = to_std(k1);
  sol.K2bar = to_std(k2b);
  sol.K1bar = to_std(k1b);
  sol.K2 = to_std(k2);
  return sol;
}

double coupled_residual(const OmegaKernel& omega, const NumericKernelSolution& sol) {
  const int n1 = int(sol.y.size());
  const int n = n1 - 1;
  const double h = sol.y[1] - sol.y[0];
  const auto w = check_weights(sol.rule, n, h);
  const auto s = omega.sample(2 * sol.x, h, 2 * n + 1);
  double scale = 1.0;
  for (int j = 0; j < n1; ++j) scale = std::max({scale, std::abs(s.omega[j]), std::abs(s.omega_bar[j])});
  double res = 0;
  for (int j = 0; j < n1; ++j) {
    cplx a = sol.K1[j] + s.omega_bar[j];
    cplx b = sol.K2bar[j] + s.omega[j];
    for (int l = 0; l < n1; ++l) {
      a += w[l] * sol.K1bar[l] * s.omega_bar[l + j];
      b += w[l] * sol.K2[l] * s.omega[l + j];
    }
    res = std::max({res, std::abs(a), std::abs(b)});
  }
  return res / scale;
}

namespace {

struct NodeValue {
  double x;
  cplx Q, K1, K2bar;
  double condition;
};

NodeValue node_value(const NumericKernelSolution& s) {
  return {s.x, s.K1bar[0] - s.K2[0], s.K1[0], s.K2bar[0], s.condition};
}

// Solves at every x in xs (in parallel), keeping solutions when asked.
std::vector<NodeValue> solve_all(const OmegaKernel& omega, const std::vector<double>& xs, const RecoverOptions& o,
                                 const GridConfig& grid, std::vector<NumericKernelSolution>* keep) {
  std::vector<NodeValue> out(xs.size());
  if (keep) keep->resize(xs.size());
  parallel_for(int(xs.size()), o.threads, [&](int i) {
    auto s = solve_at(omega, xs[i], grid);
    out[i] = node_value(s);
    if (keep) (*keep)[i] = std::move(s);
  });
  return out;
}

// Gauss-Legendre integral of Q over [a, b].
struct Panel {
  double a, b;
  Rule rule;
};

cplx panel_integral(const Panel& p, const std::vector<NodeValue>& vals) {
  cplx s = 0;
  for (std::size_t k = 0; k < p.rule.weights.size(); ++k) s += p.rule.weights[k] * vals[k].Q;
  return s;
}

// Integral over the tail beyond `edge` of Q(edge) e^{-kappa |x - edge|},
// with kappa read off the last panel.
cplx exponential_tail(cplx q_edge, cplx q_inner, double width, double x_for_error) {
  if (q_edge == 0.0) return 0.0;
  const cplx kappa = std::log(q_inner / q_edge) / width;
  if (!(kappa.real() > 0))
    throw IntegrationError("Q does not decay in the tail; cannot close the integral", x_for_error);
  return q_edge / kappa;
}

}  // namespace

RecoveredField recover(const OmegaKernel& omega, std::span<const double> xs_in, const RecoverOptions& o) {
  if (xs_in.empty()) throw ValidationError("recover needs at least one x");
  std::vector<double> xs(xs_in.begin(), xs_in.end());
  if (!std::is_sorted(xs.begin(), xs.end()) || std::adjacent_find(xs.begin(), xs.end()) != xs.end())
    throw ValidationError("recover needs strictly increasing x");

  RecoveredField f;
  f.x = xs;
  const auto at_x = solve_all(omega, xs, o, o.grid, o.keep_solutions ? &f.solutions : nullptr);

  // Interior panels between output points; wide gaps are split. Each
  // panel gets 3-point Gauss-Legendre; the middle node and the panel ends
  // also give Simpson's rule for free, and panels where the two disagree
  // (sharp peaks of Q near nearly singular points) are bisected.
  std::vector<cplx> interior(xs.size(), 0.0);  // int_{xs[0]}^{xs[i]} Q
  {
    struct Piece {
      double a, b;
      cplx qa, qb;
      int owner;
    };
    std::vector<double> ends;
    std::vector<int> end_owner;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      const int pieces = std::max(1, int(std::ceil((xs[i + 1] - xs[i]) / o.tail_panel - 1e-9)));
      const double d = (xs[i + 1] - xs[i]) / pieces;
      for (int k = 1; k < pieces; ++k) {
        ends.push_back(xs[i] + k * d);
        end_owner.push_back(int(i));
      }
    }
    const auto end_vals = solve_all(omega, ends, o, o.grid, nullptr);
    std::vector<Piece> pieces;
    {
      std::size_t e = 0;
      for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        double a = xs[i];
        cplx qa = at_x[i].Q;
        while (e < ends.size() && end_owner[e] == int(i)) {
          pieces.push_back({a, ends[e], qa, end_vals[e].Q, int(i)});
          a = ends[e];
          qa = end_vals[e].Q;
          ++e;
        }
        pieces.push_back({a, xs[i + 1], qa, at_x[i + 1].Q, int(i)});
      }
    }
    std::vector<cplx> gap(xs.size(), 0.0);
    for (int depth = 0; !pieces.empty(); ++depth) {
      std::vector<double> nodes;
      for (const auto& p : pieces) {
        const Rule r = gauss_legendre(3, p.a, p.b);
        nodes.insert(nodes.end(), r.nodes.begin(), r.nodes.end());
      }
      const auto vals = solve_all(omega, nodes, o, o.grid, nullptr);
      std::vector<Piece> next;
      for (std::size_t k = 0; k < pieces.size(); ++k) {
        const auto& p = pieces[k];
        const Rule r = gauss_legendre(3, p.a, p.b);
        const cplx qm = vals[3 * k + 1].Q;
        cplx gl = 0;
        for (int j = 0; j < 3; ++j) gl += r.weights[j] * vals[3 * k + j].Q;
        const cplx simpson = (p.b - p.a) / 6.0 * (p.qa + 4.0 * qm + p.qb);
        const double diff = std::abs(gl - simpson);
        if (depth >= o.max_bisections || diff <= std::max(o.adapt_abs_tol, o.adapt_rel_tol * std::abs(gl))) {
          gap[p.owner] += gl;
        } else {
          const double m = 0.5 * (p.a + p.b);
          next.push_back({p.a, m, p.qa, qm, p.owner});
          next.push_back({m, p.b, qm, p.qb, p.owner});
        }
      }
      pieces = std::move(next);
    }
    for (std::size_t i = 1; i < xs.size(); ++i) interior[i] = interior[i - 1] + gap[i - 1];
  }

  // Tail solves may run past the interior cap: the estimate is pessimistic
  // there, and the Q values (tiny in absolute terms) stay usable.
  GridConfig tail_grid = o.grid;
  tail_grid.condition_cap = std::max(o.grid.condition_cap, o.tail_condition_cap);

  auto march = [&](double start, cplx q_start, double dir, bool left) {
    // Returns the integral of Q from start outward, tails included.
    cplx acc = 0;
    double a = start;
    cplx qa = q_start, q_prev = 0;
    for (int k = 0; k < o.max_tail_panels; ++k) {
      if (std::abs(qa) < o.tail_q_tol) {
        (left ? f.left_end : f.right_end) = a;
        // Remainder estimate from the last panel, when it looks exponential.
        if (k > 0 && qa != 0.0 && (std::log(q_prev / qa) / o.tail_panel).real() > 0)
          acc += exponential_tail(qa, q_prev, o.tail_panel, a);
        return acc;
      }
      const double b = a + dir * o.tail_panel;
      const Panel p{std::min(a, b), std::max(a, b), gauss_legendre(3, std::min(a, b), std::max(a, b))};
      std::vector<double> nodes = p.rule.nodes;
      nodes.push_back(b);
      std::vector<NodeValue> vals;
      bool failed = false;
      try {
        vals = solve_all(omega, nodes, o, tail_grid, nullptr);
      } catch (const ConditioningError&) {
        failed = true;
      } catch (const SingularMatrixError&) {
        failed = true;
      }
      if (failed) {
        if (!left) throw IntegrationError("right tail of Q could not be resolved", b);
        // Close with an exponential fitted to the last stretch of good data.
        const cplx q_in =
            k > 0 ? q_prev : solve_all(omega, std::vector<double>{a - dir * o.tail_panel}, o, o.grid, nullptr)[0].Q;
        f.left_end = a;
        f.left_extrapolated = true;
        return acc + exponential_tail(qa, q_in, o.tail_panel, a);
      }
      acc += panel_integral(p, vals);
      a = b;
      q_prev = qa;
      qa = vals.back().Q;
    }
    throw IntegrationError(std::string(left ? "left" : "right") + " tail of Q did not decay within " +
                               std::to_string(o.max_tail_panels) + " panels",
                           a);
  };

  const cplx right = march(xs.back(), at_x.back().Q, +1.0, false);
  const cplx left = march(xs.front(), at_x.front().Q, -1.0, true);

  const cplx total = left + interior.back() + right;
  f.phase = std::exp(2.0 * total);
  f.mu = -4.0 * I_unit * total;
  f.mu_principal = principal_mu(f.mu);
  const std::size_t m = xs.size();
  f.q.resize(m);
  f.r.resize(m);
  f.E.resize(m);
  f.Q.resize(m);
  f.G.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    const cplx below = left + interior[i];
    const cplx G = total - below;
    f.Q[i] = at_x[i].Q;
    f.G[i] = G;
    f.E[i] = std::exp(2.0 * below);
    f.q[i] = -2.0 * at_x[i].K1 * std::exp(-4.0 * G);
    f.r[i] = -2.0 * at_x[i].K2bar * std::exp(4.0 * G);
  }
  return f;
}

namespace {

// Weights omega_j with sum_j omega_j K_j = integral of the piecewise
// Lagrange interpolant of K times e^{i k y} over the grid. Groups of 4
// intervals (degree 4) when possible, else groups of 2.
std::vector<cplx> filon_weights(const std::vector<double>& y, double k) {
  const int n = int(y.size()) - 1;
  const int g = (n % 4 == 0) ? 4 : 2;
  if (n % g != 0) throw DimensionError("grid needs an even number of intervals");
  const double h = y[1] - y[0];
  std::vector<cplx> out(n + 1, 0.0);
  for (int p = 0; p < n; p += g) {
    const Rule r = gauss_legendre(8, y[p], y[p + g]);
    for (std::size_t q = 0; q < r.nodes.size(); ++q) {
      const double t = (r.nodes[q] - y[p]) / h;  // local coordinate in [0, g]
      const cplx e = r.weights[q] * std::exp(I_unit * k * r.nodes[q]);
      for (int j = 0; j <= g; ++j) {
        double L = 1;
        for (int i = 0; i <= g; ++i)
          if (i != j) L *= (t - i) / double(j - i);
        out[p + j] += L * e;
      }
    }
  }
  return out;
}

cplx apply(const std::vector<cplx>& w, const std::vector<cplx>& K) {
  cplx s = 0;
  for (std::size_t j = 0; j < w.size(); ++j) s += w[j] * K[j];
  return s;
}

}  // namespace

JostPair reconstruct_jost(const NumericKernelSolution& sol, cplx G, cplx zeta) {
  if (std::abs(zeta.imag()) > 1e-14 * std::max(1.0, std::abs(zeta)))
    throw ValidationError("kernel reconstruction of Jost solutions needs real zeta");
  const double lam = (zeta * zeta).real();
  const double x = sol.x;
  const auto wp = filon_weights(sol.y, lam);
  const auto wm = filon_weights(sol.y, -lam);
  JostPair j;
  j.psi(0) = zeta * apply(wp, sol.K1) * std::exp(-2.0 * G);
  j.psi(1) = (std::exp(I_unit * lam * x) + apply(wp, sol.K2)) * std::exp(2.0 * G);
  j.psibar(0) = (std::exp(-I_unit * lam * x) + apply(wm, sol.K1bar)) * std::exp(-2.0 * G);
  j.psibar(1) = zeta * apply(wm, sol.K2bar) * std::exp(2.0 * G);
  return j;
}

}  // namespace marchenko
