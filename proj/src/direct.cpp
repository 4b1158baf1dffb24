#include "marchenko/direct.hpp"

#include <array>
#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <numbers>

#include "marchenko/errors.hpp"
#include "marchenko/quadrature.hpp"

namespace marchenko {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kPi = std::numbers::pi;

// Real and imaginary parts interpolated separately.
struct ComplexSpline {
  boost::math::interpolators::cardinal_cubic_b_spline<double> re, im;
  cplx operator()(double x) const { return {re(x), im(x)}; }
};

ScalarField spline_of(double x0, double h, const std::vector<cplx>& v) {
  std::vector<double> re(v.size()), im(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    re[k] = v[k].real();
    im[k] = v[k].imag();
  }
  auto s = std::make_shared<ComplexSpline>(ComplexSpline{{re.begin(), re.end(), x0, h}, {im.begin(), im.end(), x0, h}});
  return [s](double x) { return (*s)(x); };
}

struct ComplexHermite {
  boost::math::interpolators::cubic_hermite<std::vector<double>> re, im;
};

// Hermite interpolation when exact derivatives are known; returns the
// value and derivative interpolants.
std::pair<ScalarField, ScalarField> hermite_of(const std::vector<double>& xs, const std::vector<cplx>& v,
                                               const std::vector<cplx>& dv) {
  std::vector<double> re(v.size()), im(v.size()), dre(v.size()), dim(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    re[k] = v[k].real();
    im[k] = v[k].imag();
    dre[k] = dv[k].real();
    dim[k] = dv[k].imag();
  }
  auto x1 = xs, x2 = xs;
  auto s = std::make_shared<ComplexHermite>(ComplexHermite{{std::move(x1), std::move(re), std::move(dre)},
                                                           {std::move(x2), std::move(im), std::move(dim)}});
  return {[s](double x) { return cplx(s->re(x), s->im(x)); },
          [s](double x) { return cplx(s->re.prime(x), s->im.prime(x)); }};
}

using State = std::array<cplx, 2>;
namespace ode = boost::numeric::odeint;

}  // namespace

cplx PotentialField::dq_at(double x) const {
  if (x < x_min || x > x_max) return 0.0;
  if (dq) return dq(x);
  return central_difference6([this](double z) { return q_at(z); }, x, 1e-3);
}

cplx PotentialField::dr_at(double x) const {
  if (x < x_min || x > x_max) return 0.0;
  if (dr) return dr(x);
  return central_difference6([this](double z) { return r_at(z); }, x, 1e-3);
}

double PotentialField::tail_level() const {
  return std::max({std::abs(q(x_min)), std::abs(r(x_min)), std::abs(q(x_max)), std::abs(r(x_max))});
}

PotentialField zero_field(double x_min, double x_max) {
  const ScalarField zero = [](double) { return cplx(0); };
  return {zero, zero, zero, zero, x_min, x_max};
}

PotentialField field_from_samples(double x0, double h, const std::vector<cplx>& q, const std::vector<cplx>& r,
                                  const std::vector<cplx>& dq, const std::vector<cplx>& dr) {
  if (q.size() != r.size() || q.size() < 4) throw DimensionError("field samples: q and r need the same length >= 4");
  if (!(h > 0)) throw ValidationError("field samples: spacing must be positive");
  PotentialField f;
  f.x_min = x0;
  f.x_max = x0 + h * double(q.size() - 1);
  if (!dq.empty() || !dr.empty()) {
    if (dq.size() != q.size() || dr.size() != r.size())
      throw DimensionError("field samples: derivative samples must match q and r");
    std::vector<double> xs(q.size());
    for (std::size_t k = 0; k < xs.size(); ++k) xs[k] = x0 + h * double(k);
    std::tie(f.q, f.dq) = hermite_of(xs, q, dq);
    std::tie(f.r, f.dr) = hermite_of(xs, r, dr);
  } else {
    f.q = spline_of(x0, h, q);
    f.r = spline_of(x0, h, r);
  }
  return f;
}

PotentialField field_from_model(const ReflectionlessModel& m, double x_min, double x_max, double h, int threads) {
  if (!(x_max > x_min)) throw ValidationError("field window must have x_min < x_max");
  const int n = std::max(4, int(std::lround((x_max - x_min) / h)));
  const double step = (x_max - x_min) / n;
  std::vector<double> xs(n + 1);
  for (int k = 0; k <= n; ++k) xs[k] = x_min + step * k;
  const auto s = sample_potentials(m, xs, threads);
  return field_from_samples(x_min, step, s.q, s.r, s.dq, s.dr);
}

OffDiagonalSystem system_for(const PotentialField& f, cplx zeta) {
  return {[f, zeta](double x) { return zeta * f.q_at(x); }, [f, zeta](double x) { return zeta * f.r_at(x); },
          f.x_min, f.x_max};
}

std::vector<Vec2> integrate_hatted(const OffDiagonalSystem& sys, cplx lambda, double x0, const Vec2& y0,
                                   std::span<const double> xs, const OdeOptions& opts) {
  std::vector<Vec2> out;
  out.reserve(xs.size());
  if (xs.empty()) return out;
  const double dir = (xs.back() >= x0) ? 1.0 : -1.0;
  std::vector<double> times{x0};
  for (double x : xs) {
    if ((x - times.back()) * dir < 0) throw ValidationError("integration points must move away from the start");
    if (x != times.back()) times.push_back(x);
  }
  const cplx two_i_lambda = 2.0 * I_unit * lambda;
  auto rhs = [&](const State& y, State& dy, double x) {
    const cplx e = std::exp(two_i_lambda * x);
    dy[0] = sys.a(x) * e * y[1];
    dy[1] = sys.b(x) / e * y[0];
  };
  std::map<double, State> at;
  at[x0] = {y0(0), y0(1)};
  if (times.size() > 1) {
    State y{y0(0), y0(1)};
    double last = x0;
    auto observe = [&](const State& s, double x) {
      if (!std::isfinite(std::abs(s[0])) || !std::isfinite(std::abs(s[1])))
        throw IntegrationError("Jost integration produced non-finite values", x);
      last = x;
      at[x] = s;
    };
    try {
      auto stepper = ode::make_dense_output(opts.abs_tol, opts.rel_tol, ode::runge_kutta_dopri5<State>());
      ode::integrate_times(stepper, rhs, y, times.begin(), times.end(), dir * 1e-3, observe,
                           ode::max_step_checker(200000));
    } catch (const IntegrationError&) {
      throw;
    } catch (const std::exception& e) {
      throw IntegrationError(std::string("Jost integration failed: ") + e.what(), last);
    }
  }
  for (double x : xs) {
    const auto& s = at.at(x);
    out.emplace_back(s[0], s[1]);
  }
  return out;
}

namespace {

Vec2 unhat(const Vec2& h, cplx lambda, double x) {
  const cplx e = std::exp(-I_unit * lambda * x);
  return Vec2(h(0) * e, h(1) / e);
}

double midpoint(const OffDiagonalSystem& sys) { return 0.5 * (sys.x_min + sys.x_max); }

}  // namespace

JostEvaluation integrate_jost(const OffDiagonalSystem& sys, cplx lambda, cplx zeta, std::span<const double> grid_in,
                              const OdeOptions& opts) {
  std::vector<double> grid(grid_in.begin(), grid_in.end());
  if (grid.empty()) {
    grid.resize(201);
    for (int k = 0; k <= 200; ++k) grid[k] = sys.x_min + (sys.x_max - sys.x_min) * k / 200.0;
  }
  if (!std::is_sorted(grid.begin(), grid.end())) throw ValidationError("Jost grid must be ascending");
  if (grid.front() < sys.x_min || grid.back() > sys.x_max)
    throw ValidationError("Jost grid must lie inside the window");
  std::vector<double> rev(grid.rbegin(), grid.rend());

  JostEvaluation j;
  j.zeta = zeta;
  j.lambda = lambda;
  j.x = grid;
  auto psi = integrate_hatted(sys, lambda, sys.x_max, Vec2(0, 1), rev, opts);
  auto psibar = integrate_hatted(sys, lambda, sys.x_max, Vec2(1, 0), rev, opts);
  auto phi = integrate_hatted(sys, lambda, sys.x_min, Vec2(1, 0), grid, opts);
  auto phibar = integrate_hatted(sys, lambda, sys.x_min, Vec2(0, 1), grid, opts);
  const std::size_t n = grid.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double x = grid[k];
    j.psi.push_back(unhat(psi[n - 1 - k], lambda, x));
    j.psibar.push_back(unhat(psibar[n - 1 - k], lambda, x));
    j.phi.push_back(unhat(phi[k], lambda, x));
    j.phibar.push_back(unhat(phibar[k], lambda, x));
  }
  return j;
}

JostEvaluation integrate_jost(const PotentialField& f, cplx zeta, std::span<const double> grid,
                              const OdeOptions& opts) {
  return integrate_jost(system_for(f, zeta), zeta * zeta, zeta, grid, opts);
}

HattedJost hatted_jost_at(const OffDiagonalSystem& sys, cplx lambda, double x_eval, const OdeOptions& opts) {
  const double at[1] = {x_eval};
  HattedJost h;
  h.psi = integrate_hatted(sys, lambda, sys.x_max, Vec2(0, 1), at, opts)[0];
  h.psibar = integrate_hatted(sys, lambda, sys.x_max, Vec2(1, 0), at, opts)[0];
  h.phi = integrate_hatted(sys, lambda, sys.x_min, Vec2(1, 0), at, opts)[0];
  h.phibar = integrate_hatted(sys, lambda, sys.x_min, Vec2(0, 1), at, opts)[0];
  return h;
}

ScatteringCoefficients coefficients_from_wronskians(const HattedJost& j) {
  const cplx w_plus = wronskian(j.phi, j.psi);        // 1 / T
  const cplx w_minus = wronskian(j.psibar, j.phibar);  // 1 / Tbar
  if (std::abs(w_plus) < 1e-14 || std::abs(w_minus) < 1e-14)
    throw DivisionError("vanishing Wronskian (spectral singularity on the real axis)");
  ScatteringCoefficients c;
  c.T = 1.0 / w_plus;
  c.Tbar = 1.0 / w_minus;
  c.R = wronskian(j.phi, j.psibar) / wronskian(j.psi, j.phi);
  c.Rbar = wronskian(j.phibar, j.psi) / w_minus;
  c.L = wronskian(j.psi, j.phibar) / w_plus;
  c.Lbar = wronskian(j.phi, j.psibar) / w_minus;
  return c;
}

ScatteringCoefficients scattering_coefficients(const PotentialField& f, double zeta, const OdeOptions& opts) {
  if (zeta == 0.0) throw ValidationError("scattering coefficients need nonzero zeta");
  const auto sys = system_for(f, zeta);
  return coefficients_from_wronskians(hatted_jost_at(sys, zeta * zeta, midpoint(sys), opts));
}

cplx inverse_transmission(const PotentialField& f, cplx lambda, Side side, const OdeOptions& opts) {
  const cplx zeta = std::sqrt(lambda);
  const auto sys = system_for(f, zeta);
  const double at[1] = {midpoint(sys)};
  if (side == Side::plus) {
    const Vec2 psi = integrate_hatted(sys, lambda, sys.x_max, Vec2(0, 1), at, opts)[0];
    const Vec2 phi = integrate_hatted(sys, lambda, sys.x_min, Vec2(1, 0), at, opts)[0];
    return wronskian(phi, psi);
  }
  const Vec2 psibar = integrate_hatted(sys, lambda, sys.x_max, Vec2(1, 0), at, opts)[0];
  const Vec2 phibar = integrate_hatted(sys, lambda, sys.x_min, Vec2(0, 1), at, opts)[0];
  return wronskian(psibar, phibar);
}

// ---------------------------------------------------------------------------
// Bound-state search.

namespace {

struct Box {
  double x0, x1, y0, y1;  // Re and Im ranges of lambda
  double size() const { return std::max(x1 - x0, y1 - y0); }
  cplx center() const { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }
  bool contains(cplx z) const { return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1; }
};

class ZeroSearch {
 public:
  ZeroSearch(const PotentialField& f, Side side, const SearchOptions& o) : f_(f), side_(side), o_(o) {}

  cplx eval(cplx z) {
    const auto key = std::make_pair(z.real(), z.imag());
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    const cplx v = inverse_transmission(f_, z, side_, o_.ode);
    cache_.emplace(key, v);
    return v;
  }

  // Winding number of f around the box, or nullopt when a zero sits on (or
  // too near) the boundary.
  std::optional<int> winding(const Box& b) {
    const cplx c[5] = {{b.x0, b.y0}, {b.x1, b.y0}, {b.x1, b.y1}, {b.x0, b.y1}, {b.x0, b.y0}};
    double total = 0;
    for (int e = 0; e < 4; ++e) {
      const auto d = edge_phase(c[e], c[e + 1]);
      if (!d) return std::nullopt;
      total += *d;
    }
    const double w = total / (2 * kPi);
    if (std::abs(w - std::round(w)) > 0.05) return std::nullopt;
    return int(std::lround(w));
  }

  void search(const Box& b, std::vector<LocatedZero>& out) {
    auto w = winding(b);
    if (!w) throw SubdivisionError("a zero lies on the search box boundary; move the box");
    process(b, *w, out, 0);
  }

 private:
  std::optional<double> edge_phase(cplx a, cplx b) {
    // Adaptive sampling: split segments until each phase step is < pi/4.
    const int start = 16;
    double total = 0;
    int samples = 0;
    cplx fa = eval(a);
    for (int k = 1; k <= start; ++k) {
      const cplx zb = a + (b - a) * (double(k) / start);
      const cplx za = a + (b - a) * (double(k - 1) / start);
      const cplx fb = eval(zb);
      const auto d = segment(za, zb, fa, fb, 0, samples);
      if (!d) return std::nullopt;
      total += *d;
      fa = fb;
    }
    return total;
  }

  std::optional<double> segment(cplx za, cplx zb, cplx fa, cplx fb, int depth, int& samples) {
    if (std::abs(fa) < 1e-13 || std::abs(fb) < 1e-13) return std::nullopt;
    const double d = std::arg(fb / fa);
    if (std::abs(d) < kPi / 4) return d;
    if (depth > 20 || ++samples > o_.max_boundary_samples) return std::nullopt;
    const cplx zm = 0.5 * (za + zb);
    const cplx fm = eval(zm);
    const auto l = segment(za, zm, fa, fm, depth + 1, samples);
    if (!l) return std::nullopt;
    const auto r = segment(zm, zb, fm, fb, depth + 1, samples);
    if (!r) return std::nullopt;
    return *l + *r;
  }

  std::optional<cplx> newton(cplx z, int mult, const Box& b) {
    for (int it = 0; it < o_.max_newton; ++it) {
      const double h = 1e-6 * std::max(1.0, std::abs(z));
      const cplx fz = eval(z);
      const cplx df = (eval(z + h) - eval(z - h)) / (2 * h);
      if (df == 0.0) return std::nullopt;
      const cplx step = double(mult) * fz / df;
      z -= step;
      if (!b.contains(z)) return std::nullopt;
      if (std::abs(step) < o_.newton_tol * std::max(1.0, std::abs(z))) return z;
    }
    // Multiple zeros stall at the noise floor; accept a small last step.
    return z;
  }

  void process(const Box& b, int w, std::vector<LocatedZero>& out, int depth) {
    if (w <= 0) return;
    // Try Newton first; confirm with the winding of a small box around the
    // result.
    if (auto z = newton(b.center(), w, b)) {
      const double r = std::max(o_.min_box, 1e-4 * std::max(1.0, std::abs(*z)));
      const Box small{z->real() - r, z->real() + r, z->imag() - r, z->imag() + r};
      const auto ws = winding(small);
      if (ws && *ws == w) {
        out.push_back({*z, std::min(w, 4), w > 4});
        return;
      }
    }
    if (b.size() < o_.min_box || depth > 40) {
      out.push_back({b.center(), std::min(w, 4), w > 4});
      return;
    }
    // Quadtree split; nudge the split point when a zero sits on a new edge.
    for (double frac : {0.5, 0.5371, 0.4629, 0.5813}) {
      const double xm = b.x0 + frac * (b.x1 - b.x0), ym = b.y0 + frac * (b.y1 - b.y0);
      const Box kids[4] = {{b.x0, xm, b.y0, ym}, {xm, b.x1, b.y0, ym}, {b.x0, xm, ym, b.y1}, {xm, b.x1, ym, b.y1}};
      int ws[4];
      bool ok = true;
      int sum = 0;
      for (int k = 0; k < 4 && ok; ++k) {
        const auto wk = winding(kids[k]);
        if (!wk) ok = false;
        else {
          ws[k] = *wk;
          sum += *wk;
        }
      }
      if (!ok || sum != w) continue;
      for (int k = 0; k < 4; ++k) process(kids[k], ws[k], out, depth + 1);
      return;
    }
    throw SubdivisionError("could not isolate zeros near lambda = " + std::to_string(b.center().real()) + " + " +
                           std::to_string(b.center().imag()) + "i");
  }

  const PotentialField& f_;
  Side side_;
  SearchOptions o_;
  std::map<std::pair<double, double>, cplx> cache_;
};

}  // namespace

std::vector<LocatedZero> locate_bound_states(const PotentialField& f, const SearchBox& box, Side side,
                                             const SearchOptions& opts) {
  if (!(box.re_max > box.re_min) || !(box.im_max > box.im_min)) throw ValidationError("empty search box");
  Box b{box.re_min, box.re_max, box.im_min, box.im_max};
  if (side == Side::plus && !(box.im_min > 0))
    throw ValidationError("plus-side search box must lie above the real axis");
  if (side == Side::minus && !(box.im_max < 0))
    throw ValidationError("minus-side search box must lie below the real axis");
  std::vector<LocatedZero> out;
  ZeroSearch(f, side, opts).search(b, out);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& c) {
    return a.lambda.real() != c.lambda.real() ? a.lambda.real() < c.lambda.real() : a.lambda.imag() < c.lambda.imag();
  });
  return out;
}

// ---------------------------------------------------------------------------

FieldInvariants field_invariants(const PotentialField& f, std::span<const double> grid) {
  FieldInvariants inv;
  inv.x.assign(grid.begin(), grid.end());
  if (!std::is_sorted(inv.x.begin(), inv.x.end())) throw ValidationError("invariant grid must be ascending");
  const auto qr = [&](double z) { return f.q_at(z) * f.r_at(z); };
  inv.mu = integrate_panels(qr, f.x_min, f.x_max, 1e-13);
  inv.mu_principal = principal_mu(inv.mu);
  cplx acc = 0;
  double at = f.x_min;
  for (double x : inv.x) {
    const double to = std::clamp(x, f.x_min, f.x_max);
    if (to > at) {
      acc += integrate_panels(qr, at, to, 1e-13);
      at = to;
    }
    inv.E.push_back(std::exp(0.5 * I_unit * acc));
    const cplx q = f.q_at(x), r = f.r_at(x);
    inv.sigma.push_back(-0.5 * I_unit * q * f.dr_at(x) + 0.25 * q * q * r * r);
  }
  return inv;
}

ScalarField E_function(const PotentialField& f, double h) {
  const int n = std::max(8, int(std::lround((f.x_max - f.x_min) / h)));
  const double step = (f.x_max - f.x_min) / n;
  std::vector<cplx> E(n + 1);
  cplx acc = 0;
  E[0] = 1.0;
  for (int k = 0; k < n; ++k) {
    const double a = f.x_min + k * step;
    const Rule g = gauss_legendre(6, a, a + step);
    for (std::size_t j = 0; j < g.nodes.size(); ++j) acc += g.weights[j] * f.q_at(g.nodes[j]) * f.r_at(g.nodes[j]);
    E[k + 1] = std::exp(0.5 * I_unit * acc);
  }
  const ScalarField s = spline_of(f.x_min, step, E);
  const double lo = f.x_min, hi = f.x_max;
  const cplx last = E.back();
  return [s, lo, hi, last](double x) -> cplx {
    if (x <= lo) return 1.0;
    if (x >= hi) return last;
    return s(x);
  };
}

}  // namespace marchenko
