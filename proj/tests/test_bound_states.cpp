#include <doctest.h>

#include <algorithm>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "marchenko/bound_states.hpp"
#include "marchenko/errors.hpp"

using namespace marchenko;
using fixtures::I;

namespace {

// Hand-expanded residue formulas, written out term by term as the oracle.
std::vector<cplx> expanded_plus(cplx z, const std::vector<cplx>& t, const std::vector<cplx>& g) {
  const cplx lam = z * z;
  switch (t.size()) {
    case 1:
      return {-I * t[0] * g[0] / z};
    case 2:
      return {-I * t[0] * g[0] / z - I * t[1] / z * (g[1] - g[0] / (2.0 * lam)), -I * t[1] * g[0] / z};
    default:
      return {-I * t[0] * g[0] / z - I * t[1] / z * (g[1] - g[0] / (2.0 * lam)) -
                  I * t[2] / (2.0 * z) * (g[2] - g[1] / lam + 3.0 * g[0] / (4.0 * lam * lam)),
              -I * t[1] * g[0] / z - I * t[2] / z * (g[1] - g[0] / (2.0 * lam)), -I * t[2] * g[0] / z};
  }
}

BoundStateSpec spec(cplx lambda, std::vector<cplx> c, Side side = Side::plus) {
  return {lambda, int(c.size()), std::move(c), side};
}

}  // namespace

TEST_CASE("zeta_for: quadrant placement") {
  const cplx zp = zeta_for(I, Side::plus);
  CHECK(std::abs(zp - std::exp(I * std::numbers::pi / 4.0)) < 1e-15);
  const cplx zm = zeta_for(-2.0 * I, Side::minus);
  CHECK(zm.real() > 0);
  CHECK(zm.imag() < 0);
  CHECK(std::abs(zm * zm + 2.0 * I) < 1e-15);
}

TEST_CASE("norming_constants: simple pole at lambda = i") {
  const cplx z = std::exp(I * std::numbers::pi / 4.0);
  const auto c = norming_constants({z, {1.0}, {1.0}}, Side::plus);
  REQUIRE(c.size() == 1);
  CHECK(std::abs(c[0] - std::exp(-3.0 * I * std::numbers::pi / 4.0)) < 1e-15);

  const auto zero = norming_constants({z, {0.0}, {1.0}}, Side::plus);
  CHECK(zero[0] == cplx(0.0));
}

TEST_CASE("norming_constants: double pole with t = (1, 1), gamma = (1, 1)") {
  const cplx z = std::exp(I * std::numbers::pi / 4.0), lam = I;
  const auto c = norming_constants({z, {1.0, 1.0}, {1.0, 1.0}}, Side::plus);
  REQUIRE(c.size() == 2);
  CHECK(std::abs(c[1] - (-I / z)) < 1e-15);
  CHECK(std::abs(c[0] - (-I / z - (I / z) * (1.0 - 1.0 / (2.0 * lam)))) < 1e-15);
}

TEST_CASE("norming_constants: triple pole against the expanded formula") {
  const cplx z = zeta_for(2.0 + 3.0 * I, Side::plus);
  const std::vector<cplx> t{1.0 - I, 0.5, 2.0 * I}, g{1.5, -I, 0.25 + I};
  const auto c = norming_constants({z, t, g}, Side::plus);
  const auto ref = expanded_plus(z, t, g);
  REQUIRE(c.size() == 3);
  for (int k = 0; k < 3; ++k) CHECK(std::abs(c[k] - ref[k]) < 1e-14 * std::abs(ref[k]) + 1e-15);
}

TEST_CASE("norming_constants: multiplicity four is rejected") {
  const cplx z = zeta_for(I, Side::plus);
  CHECK_THROWS_AS(norming_constants({z, {1, 1, 1, 1}, {1, 1, 1, 1}}, Side::plus), UnsupportedMultiplicityError);
}

TEST_CASE("norming_constants: zeta in the wrong quadrant") {
  CHECK_THROWS_AS(norming_constants({zeta_for(-I, Side::minus), {1.0}, {1.0}}, Side::plus), PlacementError);
}

TEST_CASE("property: minus side equals the plus formula with t -> -t") {
  std::mt19937 rng(5);
  std::normal_distribution<double> n;
  auto rc = [&] { return cplx(n(rng), n(rng)); };
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t m = 1 + trial % 3;
    const cplx lam_bar{n(rng), -0.2 - std::abs(n(rng))};
    const cplx zb = zeta_for(lam_bar, Side::minus);
    std::vector<cplx> t(m), g(m), neg(m);
    for (std::size_t k = 0; k < m; ++k) {
      t[k] = rc();
      g[k] = rc();
      neg[k] = -t[k];
    }
    const auto got = norming_constants({zb, t, g}, Side::minus);
    const auto ref = expanded_plus(zb, neg, g);
    for (std::size_t k = 0; k < m; ++k) CHECK(std::abs(got[k] - ref[k]) <= 1e-13 * (1.0 + std::abs(ref[k])));
  }
}

TEST_CASE("assemble_triplet: simple_pair plus side") {
  const auto t = assemble_triplet({spec(I, {2.0})}, Side::plus);
  CHECK(t == fixtures::simple_pair().plus);
}

TEST_CASE("assemble_triplet: double pole at i with c0 = 2, c1 = 3") {
  const auto t = assemble_triplet({spec(I, {2.0, 3.0})}, Side::plus);
  CHECK(t == fixtures::double_pair().plus);
}

TEST_CASE("assemble_triplet: three simple poles, order independent") {
  const auto t = assemble_triplet({spec(3.0 * I, {1.0}), spec(I, {1.0}), spec(2.0 * I, {1.0})}, Side::plus);
  CHECK(t == fixtures::six_simple().plus);
}

TEST_CASE("assemble_triplet: errors") {
  CHECK_THROWS_AS(assemble_triplet({spec(I, {1.0}), spec(I, {2.0})}, Side::plus), MergeError);
  CHECK_THROWS_AS(assemble_triplet({spec(-I, {1.0})}, Side::plus), PlacementError);
  CHECK_THROWS_AS(assemble_triplet({spec(I, {1.0})}, Side::minus), PlacementError);
  CHECK_THROWS_AS(assemble_triplet({spec(I, {1.0}, Side::minus)}, Side::plus), PlacementError);
  CHECK_THROWS_AS(assemble_triplet({{I, 2, {1.0}, Side::plus}}, Side::plus), DimensionError);
}

TEST_CASE("assemble_triplet: empty list gives the empty triplet") {
  const auto t = assemble_triplet({}, Side::minus);
  CHECK(t.size() == 0);
  CHECK(t == MatrixTriplet::empty());
}

TEST_CASE("property: read_off inverts assemble_triplet and sizes add up") {
  std::mt19937 rng(17);
  std::normal_distribution<double> n;
  std::uniform_int_distribution<int> mult(1, 4), count(0, 4);
  for (int trial = 0; trial < 40; ++trial) {
    const Side side = trial % 2 ? Side::plus : Side::minus;
    const double sgn = side == Side::plus ? 1.0 : -1.0;
    std::vector<BoundStateSpec> states;
    int total = 0;
    const int k = count(rng);
    for (int j = 0; j < k; ++j) {
      const int m = mult(rng);
      std::vector<cplx> c(m);
      for (auto& v : c) v = {n(rng), n(rng)};
      states.push_back(spec(cplx(n(rng), sgn * (0.1 + std::abs(n(rng)))), std::move(c), side));
      total += m;
    }
    const auto t = assemble_triplet(states, side);
    CHECK(t.size() == total);
    auto back = read_off(t, side);
    std::sort(states.begin(), states.end(), [](const BoundStateSpec& a, const BoundStateSpec& b) {
      return a.lambda.real() != b.lambda.real() ? a.lambda.real() < b.lambda.real() : a.lambda.imag() < b.lambda.imag();
    });
    CHECK(back == states);
  }
}

TEST_CASE("validate_pair: placement, sizes and shapes") {
  const auto simple = fixtures::simple_pair();
  const auto d1 = validate_pair(simple.plus, simple.minus);
  CHECK(d1.ok());
  CHECK(d1.warnings.empty());

  const auto un = fixtures::unequal_pair();
  const auto d2 = validate_pair(un.plus, un.minus);
  CHECK(d2.ok());
  CHECK_FALSE(d2.sizes_equal);
  REQUIRE(d2.warnings.size() == 1);
  CHECK(d2.warnings[0].find("Schwartz") != std::string::npos);
  CHECK(validate_pair(un.plus, un.minus, false).warnings.empty());

  const auto d3 = validate_pair(MatrixTriplet::empty(), MatrixTriplet::empty());
  CHECK(d3.ok());
  CHECK(d3.warnings.empty());

  const auto d4 = validate_pair(simple.minus, simple.plus);
  CHECK_FALSE(d4.ok());
  CHECK_FALSE(d4.placement_ok);

  MatrixTriplet bad = simple.plus;
  bad.B = CMatrix::Ones(2, 1);
  CHECK_FALSE(validate_pair(bad, simple.minus).ok());
  CHECK_THROWS_AS(check_shapes(bad, "plus"), DimensionError);
}

TEST_CASE("validate_pair: non-special triplets only warn") {
  auto p = fixtures::double_pair();
  p.plus.B << 1, 1;
  const auto d = validate_pair(p.plus, p.minus);
  CHECK(d.ok());
  CHECK_FALSE(d.special_form_ok);
}
