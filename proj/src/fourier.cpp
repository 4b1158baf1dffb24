#include "marchenko/fourier.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "marchenko/errors.hpp"

namespace marchenko {

namespace {

constexpr double kPi = std::numbers::pi;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double factorial(int n) {
  double f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Residue evaluation for one side of the real axis: sum over poles in the
// upper (upper = true) or lower half plane of i a (i s y)^{m-1} e^{i s y p} / (m-1)!
// and of its y-derivative.
TransformValue rational_side(const RationalProfile& p, double y, int s, bool upper) {
  TransformValue out{0.0, 0.0};
  const cplx isy = I_unit * double(s) * y;
  const cplx is = I_unit * double(s);
  for (const auto& t : p.terms) {
    if ((t.pole.imag() > 0) != upper) continue;
    const int m = t.order;
    const cplx e = std::exp(isy * t.pole);
    const double fm = factorial(m - 1);
    const cplx pw = std::pow(isy, m - 1);
    out.value += I_unit * t.amplitude * pw * e / fm;
    cplx dpw = 0.0;
    if (m >= 2) dpw = double(m - 1) * is * std::pow(isy, m - 2);
    out.derivative += I_unit * t.amplitude * (dpw + is * t.pole * pw) * e / fm;
  }
  return out;
}

TransformValue rational_transform(const RationalProfile& p, double y, int s) {
  const double sy = s * y;
  if (sy > 0) return rational_side(p, y, s, true);
  if (sy < 0) {
    auto v = rational_side(p, y, s, false);
    return {-v.value, -v.derivative};
  }
  // Jump of the simple-pole terms at y = 0: take the mean.
  auto up = rational_side(p, y, s, true);
  auto lo = rational_side(p, y, s, false);
  return {0.5 * (up.value - lo.value), 0.5 * (up.derivative - lo.derivative)};
}

TransformValue gaussian_transform(const GaussianProfile& g, double y, int s) {
  const cplx base = g.amplitude / (2 * kPi) * std::sqrt(kPi / g.width) *
                    std::exp(I_unit * double(s) * g.center * y - y * y / (4 * g.width));
  return {base, base * (I_unit * double(s) * g.center - y / (2 * g.width))};
}

void sampled_transform(const SampledProfile& p, double y0, double h, int count, int s, std::vector<cplx>& value,
                       std::vector<cplx>& derivative) {
  value.assign(count, 0.0);
  derivative.assign(count, 0.0);
  const std::size_t n = p.values.size();
  for (std::size_t k = 0; k < n; ++k) {
    const double lam = p.lambda_min + double(k) * p.dlambda;
    double w = p.dlambda / (2 * kPi);
    if (k == 0 || k + 1 == n) w *= 0.5;
    const cplx fk = w * p.values[k];
    const cplx dfk = I_unit * double(s) * lam * fk;
    cplx e = std::exp(I_unit * double(s) * lam * y0);
    const cplx step = std::exp(I_unit * double(s) * lam * h);
    for (int j = 0; j < count; ++j) {
      value[j] += fk * e;
      derivative[j] += dfk * e;
      e *= step;
      // Re-anchor periodically so the recurrence does not drift.
      if ((j & 63) == 63) e = std::exp(I_unit * double(s) * lam * (y0 + (j + 1) * h));
    }
  }
}

}  // namespace

cplx profile_value(const ReflectionProfile& p, double lambda) {
  return std::visit(overloaded{
                        [](const ZeroProfile&) -> cplx { return 0.0; },
                        [&](const RationalProfile& r) -> cplx {
                          cplx v = 0.0;
                          for (const auto& t : r.terms) v += t.amplitude / std::pow(lambda - t.pole, t.order);
                          return v;
                        },
                        [&](const GaussianProfile& g) -> cplx {
                          return g.amplitude * std::exp(-g.width * (lambda - g.center) * (lambda - g.center));
                        },
                        [&](const SampledProfile& sp) -> cplx {
                          // Linear interpolation; zero outside the sampled band.
                          if (sp.values.empty()) return 0.0;
                          const double u = (lambda - sp.lambda_min) / sp.dlambda;
                          if (u < 0 || u > double(sp.values.size() - 1)) return 0.0;
                          const auto k = std::min<std::size_t>(std::size_t(u), sp.values.size() - 2);
                          const double f = u - double(k);
                          return (1 - f) * sp.values[k] + f * sp.values[k + 1];
                        },
                    },
                    p);
}

TransformValue fourier_reflection(const ReflectionProfile& p, double y, int s) {
  return std::visit(overloaded{
                        [](const ZeroProfile&) { return TransformValue{0.0, 0.0}; },
                        [&](const RationalProfile& r) { return rational_transform(r, y, s); },
                        [&](const GaussianProfile& g) { return gaussian_transform(g, y, s); },
                        [&](const SampledProfile& sp) {
                          std::vector<cplx> v, d;
                          sampled_transform(sp, y, 0.0, 1, s, v, d);
                          return TransformValue{v[0], d[0]};
                        },
                    },
                    p);
}

void fourier_reflection(const ReflectionProfile& p, double y0, double h, int count, int s, std::vector<cplx>& value,
                        std::vector<cplx>& derivative) {
  if (const auto* sp = std::get_if<SampledProfile>(&p)) {
    sampled_transform(*sp, y0, h, count, s, value, derivative);
    return;
  }
  value.resize(count);
  derivative.resize(count);
  for (int j = 0; j < count; ++j) {
    const auto t = fourier_reflection(p, y0 + j * h, s);
    value[j] = t.value;
    derivative[j] = t.derivative;
  }
}

void check_profile(const ReflectionProfile& p, double max_abs_y, double alias_tol) {
  std::visit(overloaded{
                 [](const ZeroProfile&) {},
                 [](const RationalProfile& r) {
                   for (const auto& t : r.terms) {
                     if (t.order < 1) throw ValidationError("rational reflection term needs order >= 1");
                     if (t.pole.imag() == 0.0) throw ValidationError("rational reflection pole on the real axis");
                   }
                 },
                 [](const GaussianProfile& g) {
                   if (!(g.width > 0)) throw ValidationError("gaussian reflection width must be positive");
                 },
                 [&](const SampledProfile& sp) {
                   if (sp.values.size() < 2 || !(sp.dlambda > 0))
                     throw ValidationError("sampled reflection needs >= 2 values and a positive spacing");
                   const double ends = std::max(std::abs(sp.values.front()), std::abs(sp.values.back()));
                   if (ends >= alias_tol)
                     throw AliasingError("sampled reflection not decayed at the band ends: |f| = " +
                                         std::to_string(ends));
                   const double period = kPi / sp.dlambda;
                   if (max_abs_y >= period)
                     throw AliasingError("|y| = " + std::to_string(max_abs_y) + " reaches the alias period " +
                                         std::to_string(period) + " of the lambda grid");
                 },
             },
             p);
}

OmegaKernel::OmegaKernel(ScatteringDataset data, double alias_tol)
    : data_(std::move(data)), alias_tol_(alias_tol) {
  check_shapes(data_.plus_triplet, "plus triplet");
  check_shapes(data_.minus_triplet, "minus triplet");
  check_profile(data_.reflection_plus, 0.0, alias_tol_);
  check_profile(data_.reflection_minus, 0.0, alias_tol_);
  const auto& P = data_.plus_triplet;
  const auto& N = data_.minus_triplet;
  if (P.size() > 0) CA_ = P.C * P.A;
  if (N.size() > 0) CbarAbar_ = N.C * N.A;
}

bool OmegaKernel::reflectionless() const {
  return std::holds_alternative<ZeroProfile>(data_.reflection_plus) &&
         std::holds_alternative<ZeroProfile>(data_.reflection_minus);
}

cplx OmegaKernel::omega(double y) const {
  cplx v = fourier_reflection(data_.reflection_plus, y, +1).value;
  const auto& P = data_.plus_triplet;
  if (P.size() > 0) v += (P.C * mat_exp(P.A, I_unit * y) * P.B)(0, 0);
  return v;
}

cplx OmegaKernel::omega_bar(double y) const {
  cplx v = fourier_reflection(data_.reflection_minus, y, -1).value;
  const auto& N = data_.minus_triplet;
  if (N.size() > 0) v += (N.C * mat_exp(N.A, -I_unit * y) * N.B)(0, 0);
  return v;
}

cplx OmegaKernel::d_omega(double y) const {
  cplx v = fourier_reflection(data_.reflection_plus, y, +1).derivative;
  const auto& P = data_.plus_triplet;
  if (P.size() > 0) v += I_unit * (CA_ * mat_exp(P.A, I_unit * y) * P.B)(0, 0);
  return v;
}

cplx OmegaKernel::d_omega_bar(double y) const {
  cplx v = fourier_reflection(data_.reflection_minus, y, -1).derivative;
  const auto& N = data_.minus_triplet;
  if (N.size() > 0) v -= I_unit * (CbarAbar_ * mat_exp(N.A, -I_unit * y) * N.B)(0, 0);
  return v;
}

OmegaKernel::Samples OmegaKernel::sample(double y0, double h, int count) const {
  const double extent = std::max(std::abs(y0), std::abs(y0 + (count - 1) * h));
  check_profile(data_.reflection_plus, extent, alias_tol_);
  check_profile(data_.reflection_minus, extent, alias_tol_);
  Samples s;
  fourier_reflection(data_.reflection_plus, y0, h, count, +1, s.omega, s.d_omega);
  fourier_reflection(data_.reflection_minus, y0, h, count, -1, s.omega_bar, s.d_omega_bar);
  const auto& P = data_.plus_triplet;
  const auto& N = data_.minus_triplet;
  for (int j = 0; j < count; ++j) {
    const double y = y0 + j * h;
    if (P.size() > 0) {
      const CVector eb = mat_exp(P.A, I_unit * y) * P.B;
      s.omega[j] += (P.C * eb)(0, 0);
      s.d_omega[j] += I_unit * (CA_ * eb)(0, 0);
    }
    if (N.size() > 0) {
      const CVector eb = mat_exp(N.A, -I_unit * y) * N.B;
      s.omega_bar[j] += (N.C * eb)(0, 0);
      s.d_omega_bar[j] -= I_unit * (CbarAbar_ * eb)(0, 0);
    }
  }
  return s;
}

OmegaKernel build_omega(const ScatteringDataset& data) { return OmegaKernel(data); }

}  // namespace marchenko
