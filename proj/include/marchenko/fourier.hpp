#pragma once

#include <span>
#include <variant>
#include <vector>

#include "marchenko/bound_states.hpp"
#include "marchenko/linalg.hpp"

namespace marchenko {

// Descriptors for a reflection profile f(lambda) = R(zeta)/zeta on the real
// lambda axis.

struct ZeroProfile {
  bool operator==(const ZeroProfile&) const = default;
};

/// amplitude / (lambda - pole)^order, pole off the real axis.
struct RationalTerm {
  cplx amplitude;
  cplx pole;
  int order = 1;
  bool operator==(const RationalTerm&) const = default;
};

struct RationalProfile {
  std::vector<RationalTerm> terms;
  bool operator==(const RationalProfile&) const = default;
};

/// amplitude * exp(-width * (lambda - center)^2), width > 0.
struct GaussianProfile {
  cplx amplitude;
  double width = 1.0;
  double center = 0.0;
  bool operator==(const GaussianProfile&) const = default;
};

/// Values on the uniform grid lambda_min + k * dlambda.
struct SampledProfile {
  double lambda_min = 0;
  double dlambda = 0;
  std::vector<cplx> values;
  bool operator==(const SampledProfile&) const = default;
};

using ReflectionProfile = std::variant<ZeroProfile, RationalProfile, GaussianProfile, SampledProfile>;

cplx profile_value(const ReflectionProfile& p, double lambda);

struct TransformValue {
  cplx value;
  cplx derivative;
};

/// (1/2pi) * integral of f(lambda) e^{i s lambda y} over the real line, with
/// s = +1 for the plus profile and s = -1 for the minus one, together with
/// its y-derivative. Rational profiles use residues, Gaussians the closed
/// form, sampled profiles a direct trapezoid sum (derivative via the
/// multiplication by i s lambda before transforming).
TransformValue fourier_reflection(const ReflectionProfile& p, double y, int s);

/// Values and derivatives at y0 + k h, k = 0..count-1.
void fourier_reflection(const ReflectionProfile& p, double y0, double h, int count, int s, std::vector<cplx>& value,
                        std::vector<cplx>& derivative);

/// Throws AliasingError when a sampled profile is not below alias_tol at
/// its ends, or when |y| reaches the period pi / dlambda of the sum.
void check_profile(const ReflectionProfile& p, double max_abs_y, double alias_tol = 1e-10);

struct ScatteringDataset {
  ReflectionProfile reflection_plus = ZeroProfile{};
  ReflectionProfile reflection_minus = ZeroProfile{};
  MatrixTriplet plus_triplet = MatrixTriplet::empty();
  MatrixTriplet minus_triplet = MatrixTriplet::empty();
};

/// Omega(y) = Rhat(y) + C e^{iAy} B and OmegaBar(y) = RbarHat(y) +
/// Cbar e^{-i Abar y} Bbar, with analytic derivatives.
class OmegaKernel {
 public:
  explicit OmegaKernel(ScatteringDataset data, double alias_tol = 1e-10);

  cplx omega(double y) const;
  cplx omega_bar(double y) const;
  cplx d_omega(double y) const;
  cplx d_omega_bar(double y) const;

  struct Samples {
    std::vector<cplx> omega, omega_bar, d_omega, d_omega_bar;
  };
  /// All four at y0 + k h, k = 0..count-1.
  Samples sample(double y0, double h, int count) const;

  const ScatteringDataset& data() const { return data_; }
  bool reflectionless() const;

 private:
  ScatteringDataset data_;
  double alias_tol_;
  CMatrix CA_, CbarAbar_;
};

OmegaKernel build_omega(const ScatteringDataset& data);

}  // namespace marchenko
