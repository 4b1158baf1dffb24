#pragma once

// Triplet pairs used across the tests, with closed forms computed
// independently of the library (symbolic reductions of the Gram-matrix
// formulas for each pair).

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include "marchenko/bound_states.hpp"
#include "marchenko/direct.hpp"

namespace fixtures {

using marchenko::CMatrix;
using marchenko::cplx;
using marchenko::MatrixTriplet;

inline const cplx I{0.0, 1.0};

inline MatrixTriplet triplet(std::initializer_list<std::initializer_list<cplx>> A, std::initializer_list<cplx> B,
                             std::initializer_list<cplx> C) {
  const auto n = Eigen::Index(B.size());
  MatrixTriplet t{CMatrix(n, n), CMatrix(n, 1), CMatrix(1, n)};
  Eigen::Index r = 0;
  for (const auto& row : A) {
    Eigen::Index c = 0;
    for (const auto& v : row) t.A(r, c++) = v;
    ++r;
  }
  Eigen::Index k = 0;
  for (const auto& v : B) t.B(k++, 0) = v;
  k = 0;
  for (const auto& v : C) t.C(0, k++) = v;
  return t;
}

struct PairFixture {
  MatrixTriplet plus, minus;
};

/// One simple pole at i (c = 2) and one at -2i (cbar = 3).
inline PairFixture simple_pair() { return {triplet({{I}}, {1}, {2}), triplet({{-2.0 * I}}, {1}, {3})}; }

/// Three simple poles on each side, all constants 1.
inline PairFixture six_simple() {
  return {triplet({{I, 0, 0}, {0, 2.0 * I, 0}, {0, 0, 3.0 * I}}, {1, 1, 1}, {1, 1, 1}),
          triplet({{-I, 0, 0}, {0, -2.0 * I, 0}, {0, 0, -3.0 * I}}, {1, 1, 1}, {1, 1, 1})};
}

/// A double pole at i and a double pole at -i.
inline PairFixture double_pair() {
  return {triplet({{I, 1}, {0, I}}, {0, 1}, {3, 2}), triplet({{-I, 1}, {0, -I}}, {0, 1}, {2, 3})};
}

/// A double pole at i against simple poles at -i and -2i.
inline PairFixture mixed_pair() {
  return {triplet({{I, 1}, {0, I}}, {0, 1}, {3, 2}), triplet({{-I, 0}, {0, -2.0 * I}}, {1, 1}, {1, 4})};
}

/// Sizes 3 and 2: the potentials cannot both decay.
inline PairFixture unequal_pair() {
  return {triplet({{I, 1, 0}, {0, I, 1}, {0, 0, I}}, {0, 0, 1}, {1, 1, 1}),
          triplet({{-I, 1}, {0, -I}}, {0, 1}, {1, 1})};
}

// --- simple pair closed forms ------------------------------------------

inline cplx simple_q(double x) {
  return 18.0 / (3.0 * std::exp(6 * x) - 2.0 * I) *
         std::exp(2.0 * x - 4.0 * std::atanh(1.0 / 3.0 - I * std::exp(6 * x)));
}

inline cplx simple_r(double x) {
  return 12.0 / (3.0 * std::exp(6 * x) + 4.0 * I) *
         std::exp(4.0 * x + 4.0 * std::atanh(1.0 / 3.0 - I * std::exp(6 * x)));
}

inline cplx simple_psi1(cplx zeta, double x) {
  const cplx lam = zeta * zeta, a = std::atanh(1.0 / 3.0 - I * std::exp(6 * x));
  return -9.0 * zeta * std::exp(I * lam * x + 2.0 * x - 2.0 * a) / ((lam + 2.0 * I) * (2.0 + 3.0 * I * std::exp(6 * x)));
}

inline cplx simple_psi2(cplx zeta, double x) {
  const cplx lam = zeta * zeta, a = std::atanh(1.0 / 3.0 - I * std::exp(6 * x));
  const cplx w1 = 4.0 * (lam - I) - 3.0 * I * std::exp(6 * x) * (lam + 2.0 * I);
  return w1 * std::exp(I * lam * x + 2.0 * a) / ((lam + 2.0 * I) * (-4.0 + 3.0 * I * std::exp(6 * x)));
}

inline cplx simple_psibar1(cplx zeta, double x) {
  const cplx lam = zeta * zeta, a = std::atanh(1.0 / 3.0 - I * std::exp(6 * x));
  const cplx w2 = -2.0 * (lam + 2.0 * I) - 3.0 * I * std::exp(6 * x) * (lam - I);
  return w2 * std::exp(-I * lam * x - 2.0 * a) / ((lam - I) * (2.0 + 3.0 * I * std::exp(6 * x)));
}

inline cplx simple_psibar2(cplx zeta, double x) {
  const cplx lam = zeta * zeta, a = std::atanh(1.0 / 3.0 - I * std::exp(6 * x));
  return 6.0 * zeta * std::exp(-I * lam * x + 4.0 * x + 2.0 * a) / ((lam - I) * (-4.0 + 3.0 * I * std::exp(6 * x)));
}

inline cplx simple_T(cplx lam) { return -0.5 * (lam + 2.0 * I) / (lam - I); }
inline cplx simple_Tbar(cplx lam) { return -2.0 * (lam - I) / (lam + 2.0 * I); }
inline cplx simple_mu() { return {2 * std::numbers::pi, -2 * std::log(2.0)}; }

inline cplx six_T(cplx l) {
  return -((l + I) * (l + 2.0 * I) * (l + 3.0 * I)) / ((l - I) * (l - 2.0 * I) * (l - 3.0 * I));
}
inline cplx six_Tbar(cplx l) { return 1.0 / six_T(l); }

inline cplx double_T(cplx l) { return std::pow((l + I) / (l - I), 2); }
inline cplx double_Tbar(cplx l) { return std::pow((l - I) / (l + I), 2); }

inline cplx mixed_T(cplx l) { return (l + I) * (l + 2.0 * I) / (2.0 * (l - I) * (l - I)); }
inline cplx mixed_Tbar(cplx l) { return 1.0 / mixed_T(l); }

// --- double pair closed forms ------------------------------------------

inline void double_qr(double x, cplx& q, cplx& r) {
  using std::exp;
  const double w9 = 48 * exp(4 * x) * (3 + 4 * x + 8 * x * x) / (-9 + 64 * exp(8 * x) + 32 * exp(4 * x) * (-2 + 5 * x));
  const double w10 = 48 * exp(4 * x) * (3 + 4 * x + 8 * x * x) / (-9 + 64 * exp(8 * x) - 16 * exp(4 * x) * (9 + 10 * x));
  const cplx w11 = 3.0 - 2.0 * I + 6.0 * x + 4.0 * exp(4 * x) * (3.0 - 4.0 * I * x);
  const cplx w12 = -9.0 + 64.0 * exp(8 * x) + 16.0 * exp(4 * x) * (-4.0 + 9.0 * I + (10.0 + 12.0 * I) * x + 24.0 * I * x * x);
  const double w13 =
      81 + 4096 * exp(16 * x) + 288 * exp(4 * x) * (9 + 10 * x) - 2048 * exp(12 * x) * (9 + 10 * x);
  const double w14 = 128 * exp(8 * x) * (315 + 792 * x + 1352 * x * x + 1152 * x * x * x + 1152 * x * x * x * x);
  const cplx w15 = 32.0 * exp(4 * x) * (1.0 + 3.0 * I * x) + 9.0 * (2.0 + 3.0 * I) + 36.0 * x;
  const cplx w16 = -9.0 + 64.0 * exp(8 * x) - 16.0 * (1.0 + I) * exp(4 * x) * (9.0 + (11.0 + I) * x + 12.0 * (1.0 + I) * x * x);
  const double w17 =
      81 + 4096 * exp(16 * x) + 576 * exp(4 * x) * (2 - 5 * x) + 4096 * exp(12 * x) * (-2 + 5 * x);
  const double w18 = 128 * exp(8 * x) * (185 + 272 * x + 1352 * x * x + 1152 * x * x * x + 1152 * x * x * x * x);
  q = 32.0 * w11 * w12 / (w13 + w14) * std::exp(2.0 * x - 2.0 * I * std::atan(w9) - 2.0 * I * std::atan(w10));
  r = 8.0 * w15 * w16 / (w17 + w18) * std::exp(2.0 * x + 2.0 * I * std::atan(w9) + 2.0 * I * std::atan(w10));
}

/// Smooth field supported on [-1, 1]: random complex cubics times the
/// standard bump function.
inline marchenko::PotentialField random_compact_field(unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  std::vector<cplx> a(4), b(4);
  for (auto& v : a) v = {n(rng), n(rng)};
  for (auto& v : b) v = {n(rng), n(rng)};
  auto bump = [](double x) { return std::abs(x) < 1 ? std::exp(-1.0 / (1.0 - x * x)) : 0.0; };
  auto poly = [](const std::vector<cplx>& c, double x) { return c[0] + x * (c[1] + x * (c[2] + x * c[3])); };
  marchenko::PotentialField f;
  f.q = [=](double x) { return 2.0 * poly(a, x) * bump(x); };
  f.r = [=](double x) { return 2.0 * poly(b, x) * bump(x); };
  f.x_min = -1.0;
  f.x_max = 1.0;
  return f;
}

/// Relative error with a floor so tiny values compare absolutely.
inline double rel(cplx a, cplx b, double floor = 1e-300) { return std::abs(a - b) / std::max(std::abs(b), floor); }

}  // namespace fixtures
