#pragma once

#include <functional>
#include <vector>

#include "marchenko/linalg.hpp"

namespace marchenko {

using ComplexFn = std::function<cplx(double)>;

/// Adaptive 15-point Gauss-Kronrod on [a, b]. Throws IntegrationError
/// (located at the interval midpoint) when the error estimate exceeds
/// max(abs_tol, rel_tol * integral of |f|).
cplx integrate(const ComplexFn& f, double a, double b, double abs_tol = 1e-10, double rel_tol = 1e-10,
               double* error = nullptr);

/// Integral over [a, b] split into unit-length panels, so a failure reports
/// the panel where it happened.
cplx integrate_panels(const ComplexFn& f, double a, double b, double abs_tol = 1e-12);

/// Composite Simpson weights for n (even) intervals of width h.
std::vector<double> simpson_weights(int n, double h);

/// Composite Boole (5-point Newton-Cotes) weights; n must be a multiple of 4.
std::vector<double> boole_weights(int n, double h);

/// Trapezoid weights with Gregory end corrections at both ends, exact for
/// polynomials of degree < order (order in {2, 4, 6, 8}); n >= 2 * order.
std::vector<double> gregory_weights(int n, double h, int order = 8);

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule with p in {2, 3, 4, 6, 8} nodes mapped to [a, b],
/// nodes ascending.
Rule gauss_legendre(int p, double a, double b);

/// Sixth-order central difference of f at x with step h.
cplx central_difference6(const ComplexFn& f, double x, double h);

/// Runs body(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Exceptions from workers are rethrown in the caller.
void parallel_for(int n, int threads, const std::function<void(int)>& body);

/// Worker count from MARCHENKO_THREADS, else hardware concurrency.
int default_threads();

}  // namespace marchenko
