#include <doctest.h>

#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "marchenko/errors.hpp"
#include "marchenko/quadrature.hpp"
#include "marchenko/reflectionless.hpp"

using namespace marchenko;
using fixtures::I;
using fixtures::rel;

namespace {

constexpr double pi = std::numbers::pi;

ReflectionlessModel model_of(const fixtures::PairFixture& p) { return build_model(p.plus, p.minus); }

std::vector<double> grid41() {
  std::vector<double> xs;
  for (int k = 0; k <= 40; ++k) xs.push_back(-2.0 + 0.1 * k);
  return xs;
}

const std::vector<cplx> sample_lambdas{0.0, 1.0, 2.0 + I, -3.0 + 0.5 * I, 0.7 - 1.3 * I};

}  // namespace

TEST_CASE("build_model: simple_pair Gram scalars") {
  const auto m = model_of(fixtures::simple_pair());
  CHECK(std::abs(m.M(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(m.Mbar(0, 0) - 2.0 / 3.0) < 1e-15);
}

TEST_CASE("empty model: every quantity is trivial") {
  const auto m = build_model(MatrixTriplet::empty(), MatrixTriplet::empty());
  CHECK(m.empty());
  const auto g = gamma_pair(m, 0.3);
  CHECK(g.Gamma.size() == 0);
  const auto k = kernels(m, -1.0, 0.5);
  CHECK(k.K1 == cplx(0.0));
  CHECK(k.K2bar == cplx(0.0));
  const auto gf = g_functions(m, 0.1);
  CHECK(gf.g1 == cplx(0.0));
  CHECK(gf.g2 == cplx(0.0));
  CHECK(G_of_x(m, -3.0) == cplx(0.0));
  const auto p = potentials(m, 1.0);
  CHECK(p.q == cplx(0.0));
  CHECK(p.r == cplx(0.0));
  const auto e = E_and_mu(m);
  CHECK(std::abs(e.mu) == 0.0);
  CHECK(std::abs(e.E(-2.0) - 1.0) < 1e-15);
  CHECK(std::abs(transmissions(m, cplx(1.3)).T - 1.0) < 1e-15);
}

TEST_CASE("gamma_pair and kernels: simple_pair scalar forms") {
  const auto m = model_of(fixtures::simple_pair());
  for (double x : {-0.8, -0.1, 0.0, 0.4, 1.5}) {
    const auto g = gamma_pair(m, x);
    CHECK(rel(g.Gamma(0, 0), 1.0 + 4.0 * I / 3.0 * std::exp(-6 * x)) < 1e-13);
    CHECK(rel(g.GammaBar(0, 0), 1.0 - 2.0 * I / 3.0 * std::exp(-6 * x)) < 1e-13);
    for (double dy : {0.0, 0.3, 2.0}) {
      const double y = x + dy;
      const cplx expect = -6.0 * std::exp(-x - y) / (3.0 + 4.0 * I * std::exp(-6 * x));
      CHECK(rel(kernels(m, x, y).K2bar, expect) < 1e-12);
    }
  }
  const auto far = gamma_pair(m, 12.0);
  CHECK(std::abs(far.Gamma(0, 0) - 1.0) < 1e-30);
}

TEST_CASE("g_functions: simple_pair at x = 0 and decay") {
  const auto m = model_of(fixtures::simple_pair());
  CHECK(rel(g_functions(m, 0.0).g1, 6.0 * I / (3.0 - 2.0 * I)) < 1e-13);
  const auto far = g_functions(m, 15.0);
  CHECK(std::abs(far.g1) < 1e-12);
  CHECK(std::abs(far.g2) < 1e-12);
}

TEST_CASE("potentials: simple_pair against the closed forms") {
  const auto m = model_of(fixtures::simple_pair());
  double worst = 0;
  for (double x : grid41()) {
    const auto p = potentials(m, x);
    worst = std::max({worst, rel(p.q, fixtures::simple_q(x)), rel(p.r, fixtures::simple_r(x))});
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("potentials: double_pair against the closed forms") {
  const auto m = model_of(fixtures::double_pair());
  for (double x : grid41()) {
    cplx q, r;
    fixtures::double_qr(x, q, r);
    const auto p = potentials(m, x);
    CHECK(rel(p.q, q) < 1e-8);
    CHECK(rel(p.r, r) < 1e-8);
  }
}

TEST_CASE("sample_potentials agrees with pointwise evaluation") {
  const auto m = model_of(fixtures::mixed_pair());
  const auto xs = grid41();
  const auto s = sample_potentials(m, xs, 2);
  for (std::size_t k = 0; k < xs.size(); k += 5) {
    const auto p = potentials(m, xs[k]);
    CHECK(rel(s.q[k], p.q) < 1e-9);
    CHECK(rel(s.r[k], p.r) < 1e-9);
  }
}

TEST_CASE("E_and_mu: principal mu for the four fixtures") {
  struct Case {
    fixtures::PairFixture p;
    cplx mu;
  };
  const std::vector<Case> cases{{fixtures::simple_pair(), fixtures::simple_mu()},
                                {fixtures::six_simple(), 2 * pi},
                                {fixtures::double_pair(), 0.0},
                                {fixtures::mixed_pair(), -2.0 * I * std::log(2.0)}};
  for (const auto& c : cases) {
    const auto e = E_and_mu(model_of(c.p));
    CHECK(std::abs(e.mu_principal - c.mu) < 1e-8);
    CHECK(std::abs(e.phase - std::exp(I * c.mu / 2.0)) < 1e-8);
    CHECK(std::abs(e.E_plus_inf - e.phase) < 1e-8);
  }
}

TEST_CASE("principal_mu: representative range") {
  CHECK(std::abs(principal_mu(cplx(6 * pi, 1.0)) - cplx(2 * pi, 1.0)) < 1e-12);
  CHECK(std::abs(principal_mu(cplx(-2 * pi, 0.0)) - cplx(2 * pi, 0.0)) < 1e-12);
  CHECK(std::abs(principal_mu(cplx(0.5, -2.0)) - cplx(0.5, -2.0)) < 1e-15);
}

TEST_CASE("transmissions: rational forms") {
  struct Case {
    fixtures::PairFixture p;
    cplx (*T)(cplx);
    cplx (*Tbar)(cplx);
  };
  const std::vector<Case> cases{{fixtures::simple_pair(), fixtures::simple_T, fixtures::simple_Tbar},
                                {fixtures::six_simple(), fixtures::six_T, fixtures::six_Tbar},
                                {fixtures::double_pair(), fixtures::double_T, fixtures::double_Tbar},
                                {fixtures::mixed_pair(), fixtures::mixed_T, fixtures::mixed_Tbar}};
  for (const auto& c : cases) {
    const auto m = model_of(c.p);
    for (cplx lam : sample_lambdas) {
      const cplx z = std::sqrt(lam);
      const auto t = transmissions(m, z);
      CHECK(rel(t.T, c.T(lam)) < 1e-8);
      CHECK(rel(t.Tbar, c.Tbar(lam)) < 1e-8);
    }
    CHECK(std::abs(transmissions(m, cplx(0.0)).T - 1.0) < 1e-8);
  }
}

TEST_CASE("transmissions: a pole of T is a spectral collision") {
  const auto m = model_of(fixtures::simple_pair());
  CHECK_THROWS_AS(transmissions(m, zeta_for(I, Side::plus)), SpectralCollisionError);
}

TEST_CASE("transmissions_limit agrees with the rational path") {
  const auto m = model_of(fixtures::simple_pair());
  for (double z : {0.3, 1.0, 1.7}) {
    const auto a = transmissions(m, z), b = transmissions_limit(m, z);
    CHECK(rel(b.T, a.T) < 1e-6);
    CHECK(rel(b.Tbar, a.Tbar) < 1e-6);
  }
}

TEST_CASE("property: T Tbar = 1 and T is even in zeta") {
  std::mt19937 rng(3);
  std::normal_distribution<double> n;
  for (const auto& p : {fixtures::simple_pair(), fixtures::six_simple(), fixtures::mixed_pair()}) {
    const auto m = model_of(p);
    for (int k = 0; k < 10; ++k) {
      const cplx z{n(rng), 0.3 * n(rng)};
      const auto a = transmissions(m, z), b = transmissions(m, -z);
      CHECK(std::abs(a.T * a.Tbar - 1.0) < 1e-12);
      CHECK(a.T == b.T);
    }
  }
}

TEST_CASE("jost: simple_pair against the closed forms") {
  const auto m = model_of(fixtures::simple_pair());
  for (cplx z : {cplx(0.4), cplx(1.3), cplx(0.8, 0.3), cplx(-1.1, -0.2)}) {
    for (double x : {-1.5, -0.3, 0.0, 0.6, 1.9}) {
      const auto j = jost(m, z, x);
      CHECK(rel(j.psi(0), fixtures::simple_psi1(z, x)) < 1e-9);
      CHECK(rel(j.psi(1), fixtures::simple_psi2(z, x)) < 1e-9);
      CHECK(rel(j.psibar(0), fixtures::simple_psibar1(z, x)) < 1e-9);
      CHECK(rel(j.psibar(1), fixtures::simple_psibar2(z, x)) < 1e-9);
    }
  }
}

TEST_CASE("jost: right-end normalisation and parity") {
  const auto m = model_of(fixtures::mixed_pair());
  const double z = 0.9, x = 14.0;
  const auto j = jost(m, z, x);
  CHECK(std::abs(j.psi(1) * std::exp(-I * z * z * x) - 1.0) < 1e-10);
  CHECK(std::abs(j.psi(0)) < 1e-10);
  for (double xx : {-1.0, 0.2, 1.1}) {
    const auto a = jost(m, z, xx), b = jost(m, -z, xx);
    CHECK(std::abs(a.psi(0) + b.psi(0)) <= 1e-13 * std::abs(a.psi(0)));
    CHECK(std::abs(a.psi(1) - b.psi(1)) <= 1e-13 * std::abs(a.psi(1)));
  }
}

TEST_CASE("property: diagonal kernel identities on simple_pair") {
  const auto m = model_of(fixtures::simple_pair());
  const auto e = E_and_mu(m);
  const cplx emu = std::exp(I * e.mu);
  for (int k = 0; k <= 30; ++k) {
    const double x = -3.0 + 0.2 * k;
    const auto K = kernels(m, x, x);
    const auto p = potentials(m, x);
    const cplx E = e.E(x);
    CHECK(rel(K.K1, -0.5 * emu * p.q / (E * E)) < 1e-8);
    CHECK(rel(K.K2bar, -0.5 / emu * p.r * E * E) < 1e-8);
    CHECK(std::abs(K.K1bar - K.K2 - I * p.q * p.r / 4.0) < 1e-8 * std::max(1.0, std::abs(p.q * p.r)));
  }
}

TEST_CASE("property: potentials and Jost solutions satisfy the linear system") {
  const double h = 1e-3;
  for (const auto& p : {fixtures::simple_pair(), fixtures::mixed_pair()}) {
    const auto m = model_of(p);
    for (cplx z : {cplx(0.7), cplx(1.2, 0.1)}) {
      const cplx lam = z * z;
      for (double x : {-1.0, 0.0, 0.9}) {
        const auto pot = potentials(m, x);
        const auto j = jost(m, z, x);
        for (int comp = 0; comp < 2; ++comp) {
          auto col = [&](int c) -> ComplexFn {
            return [&, c, comp](double s) { return comp == 0 ? jost(m, z, s).psi(c) : jost(m, z, s).psibar(c); };
          };
          const Eigen::Vector2cd v = comp == 0 ? j.psi : j.psibar;
          const cplx d1 = central_difference6(col(0), x, h), d2 = central_difference6(col(1), x, h);
          const cplx res1 = d1 - (-I * lam * v(0) + z * pot.q * v(1));
          const cplx res2 = d2 - (z * pot.r * v(0) + I * lam * v(1));
          CHECK(std::abs(res1) < 1e-6 * std::max(1.0, v.norm()));
          CHECK(std::abs(res2) < 1e-6 * std::max(1.0, v.norm()));
        }
      }
    }
  }
}

TEST_CASE("property: kernels satisfy the coupled Marchenko system on random models") {
  std::mt19937 rng(41);
  std::normal_distribution<double> n;
  std::uniform_real_distribution<double> im(0.6, 2.0), re(-1.0, 1.0), ux(-0.5, 0.5), dy(0.05, 1.5);
  int checked = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const int size = 1 + trial % 3;
    std::vector<BoundStateSpec> ps, ms;
    for (int k = 0; k < size; ++k) {
      ps.push_back({cplx(re(rng), im(rng)), 1, {cplx(n(rng), n(rng))}, Side::plus});
      ms.push_back({cplx(re(rng), -im(rng)), 1, {cplx(n(rng), n(rng))}, Side::minus});
    }
    if (trial % 4 == 3) {  // one Jordan block per side
      ps = {{cplx(re(rng), im(rng)), size, std::vector<cplx>(size, cplx(1.0, n(rng))), Side::plus}};
      ms = {{cplx(re(rng), -im(rng)), size, std::vector<cplx>(size, cplx(n(rng), 1.0)), Side::minus}};
    }
    const auto m = build_model(assemble_triplet(ps, Side::plus), assemble_triplet(ms, Side::minus));
    auto omega = [&](double y) { return (m.plus.C * mat_exp(m.plus.A, I * y) * m.plus.B)(0, 0); };
    auto omega_bar = [&](double y) { return (m.minus.C * mat_exp(m.minus.A, -I * y) * m.minus.B)(0, 0); };
    auto d_omega = [&](double y) { return (I * m.plus.C * m.plus.A * mat_exp(m.plus.A, I * y) * m.plus.B)(0, 0); };
    auto d_omega_bar = [&](double y) {
      return (-I * m.minus.C * m.minus.A * mat_exp(m.minus.A, -I * y) * m.minus.B)(0, 0);
    };
    const double x = ux(rng), y = x + dy(rng), top = x + 60.0;
    try {
      const auto K = kernels(m, x, y);
      auto at = [&](double z) { return kernels(m, x, z); };
      const cplx i11 = integrate([&](double z) { return at(z).K1 * d_omega(z + y); }, x, top, 1e-13, 1e-12);
      const cplx i12 = integrate([&](double z) { return at(z).K1bar * omega_bar(z + y); }, x, top, 1e-13, 1e-12);
      const cplx i21 = integrate([&](double z) { return at(z).K2 * omega(z + y); }, x, top, 1e-13, 1e-12);
      const cplx i22 = integrate([&](double z) { return at(z).K2bar * d_omega_bar(z + y); }, x, top, 1e-13, 1e-12);
      const double scale = std::max({1.0, std::abs(omega(x + y)), std::abs(omega_bar(x + y))});
      CHECK(std::abs(K.K1bar - I * i11) < 1e-7 * scale);
      CHECK(std::abs(K.K1 + omega_bar(x + y) + i12) < 1e-7 * scale);
      CHECK(std::abs(K.K2bar + omega(x + y) + i21) < 1e-7 * scale);
      CHECK(std::abs(K.K2 + I * i22) < 1e-7 * scale);
      ++checked;
    } catch (const SingularMatrixError&) {
      // random data may put a singular Gamma inside [x, x + 60]
    }
  }
  CHECK(checked >= 8);
}

TEST_CASE("unequal_pair: r grows to the left while q decays at both ends") {
  const auto m = model_of(fixtures::unequal_pair());
  double qmax = 0, prev = 0;
  for (int k = 0; k <= 160; ++k) qmax = std::max(qmax, std::abs(potentials(m, -8.0 + 0.1 * k).q));
  CHECK(std::abs(potentials(m, -8.0).q) < 1e-3 * qmax);
  CHECK(std::abs(potentials(m, 8.0).q) < 1e-3 * qmax);
  for (double x : {-2.0, -4.0, -6.0, -8.0}) {
    const double a = std::abs(potentials(m, x).r);
    CHECK(a > prev);
    prev = a;
  }
  CHECK(prev > 1e3);
  CHECK_THROWS_AS(E_and_mu(m), IntegrationError);
}
