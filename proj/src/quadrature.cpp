#include "marchenko/quadrature.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>

#include "marchenko/errors.hpp"

namespace marchenko {

namespace {

// Bisection driver around single (non-adaptive) 15-point Gauss-Kronrod
// steps. Boost's own driver only has a relative target, which never stops
// on panels where the integrand is far below the absolute tolerance.
// One 15-point Kronrod step with |K15 - G7| as the error estimate. Boost's
// single-step estimate carries a floor of a few eps * |f| that does not
// shrink with the interval, which stalls bisection near large integrands.
cplx kronrod_step(const ComplexFn& f, double a, double b, double& err, double& l1) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  static const auto& xk = GK::abscissa();
  static const auto& wk = GK::weights();
  static const auto& wg = G::weights();
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  const cplx f0 = f(c);
  cplx k = wk[0] * f0, g = wg[0] * f0;
  double abs_sum = wk[0] * std::abs(f0);
  for (std::size_t j = 1; j < xk.size(); ++j) {
    const cplx fl = f(c - h * xk[j]), fr = f(c + h * xk[j]);
    k += wk[j] * (fl + fr);
    abs_sum += wk[j] * (std::abs(fl) + std::abs(fr));
    if (j % 2 == 0) g += wg[j / 2] * (fl + fr);
  }
  err = std::abs(h * (k - g));
  l1 = std::abs(h) * abs_sum;
  return h * k;
}

cplx adapt(const ComplexFn& f, double a, double b, double abs_tol, double rel_tol, int depth, double& err_sum,
           double& l1_sum) {
  double err = 0, l1 = 0;
  const cplx v = kronrod_step(f, a, b, err, l1);
  if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
    throw IntegrationError("non-finite integrand on [" + std::to_string(a) + ", " + std::to_string(b) + "]",
                           0.5 * (a + b));
  if (err <= std::max(abs_tol, rel_tol * l1) || depth == 0) {
    if (depth == 0 && err > std::max(abs_tol, rel_tol * l1)) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", err);
      throw IntegrationError("quadrature did not converge on [" + std::to_string(a) + ", " + std::to_string(b) +
                                 "], error estimate " + buf,
                             0.5 * (a + b));
    }
    err_sum += err;
    l1_sum += l1;
    return v;
  }
  const double c = 0.5 * (a + b);
  return adapt(f, a, c, 0.5 * abs_tol, rel_tol, depth - 1, err_sum, l1_sum) +
         adapt(f, c, b, 0.5 * abs_tol, rel_tol, depth - 1, err_sum, l1_sum);
}

}  // namespace

cplx integrate(const ComplexFn& f, double a, double b, double abs_tol, double rel_tol, double* error) {
  if (a == b) {
    if (error) *error = 0;
    return 0.0;
  }
  double err = 0, l1 = 0;
  const cplx v = adapt(f, a, b, abs_tol, rel_tol, 30, err, l1);
  if (error) *error = err;
  return v;
}

cplx integrate_panels(const ComplexFn& f, double a, double b, double abs_tol) {
  const double sign = b >= a ? 1.0 : -1.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  const int panels = std::max(1, static_cast<int>(std::ceil(hi - lo)));
  const double w = (hi - lo) / panels;
  cplx sum = 0.0;
  for (int k = 0; k < panels; ++k) sum += integrate(f, lo + k * w, lo + (k + 1) * w, abs_tol);
  return sign * sum;
}

std::vector<double> simpson_weights(int n, double h) {
  if (n < 2 || n % 2 != 0) throw DimensionError("Simpson rule needs an even number of intervals");
  std::vector<double> w(n + 1);
  for (int k = 0; k <= n; ++k) w[k] = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
  for (auto& v : w) v *= h / 3.0;
  return w;
}

std::vector<double> boole_weights(int n, double h) {
  if (n < 4 || n % 4 != 0) throw DimensionError("Boole rule needs a multiple of 4 intervals");
  std::vector<double> w(n + 1, 0.0);
  static constexpr double c[5] = {7, 32, 12, 32, 7};
  for (int p = 0; p < n; p += 4)
    for (int k = 0; k < 5; ++k) w[p + k] += c[k];
  for (auto& v : w) v *= 2.0 * h / 45.0;
  return w;
}

std::vector<double> gregory_weights(int n, double h, int order) {
  if (order < 2 || order > 8 || order % 2) throw DimensionError("Gregory order must be 2, 4, 6 or 8");
  if (n < 2 * order) throw DimensionError("Gregory rule needs at least 2 * order intervals");
  // Gregory coefficients multiplying the k-th forward (left) and backward
  // (right) differences.
  static constexpr double a[7] = {1.0 / 12, 1.0 / 24, 19.0 / 720, 3.0 / 160, 863.0 / 60480, 275.0 / 24192,
                                  33953.0 / 3628800};
  std::vector<double> w(n + 1, 1.0);
  w.front() = w.back() = 0.5;
  for (int k = 1; k < order; ++k) {
    double binom = 1;  // C(k, j)
    for (int j = 0; j <= k; ++j) {
      const double c = -a[k - 1] * ((j % 2) ? -1.0 : 1.0) * binom;
      w[j] += c;
      w[n - j] += c;
      binom = binom * (k - j) / (j + 1);
    }
  }
  for (auto& v : w) v *= h;
  return w;
}

namespace {

template <unsigned N>
Rule map_rule(double a, double b) {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& x = G::abscissa();
  const auto& w = G::weights();
  Rule r;
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  // Boost stores the non-negative half of the symmetric rule.
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] == 0.0) {
      r.nodes.push_back(c);
      r.weights.push_back(w[k] * h);
    } else {
      r.nodes.push_back(c - h * x[k]);
      r.weights.push_back(w[k] * h);
      r.nodes.push_back(c + h * x[k]);
      r.weights.push_back(w[k] * h);
    }
  }
  // Ascending node order.
  std::vector<std::size_t> idx(r.nodes.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return r.nodes[i] < r.nodes[j]; });
  Rule sorted;
  for (auto k : idx) {
    sorted.nodes.push_back(r.nodes[k]);
    sorted.weights.push_back(r.weights[k]);
  }
  return sorted;
}

}  // namespace

Rule gauss_legendre(int p, double a, double b) {
  switch (p) {
    case 2: return map_rule<2>(a, b);
    case 3: return map_rule<3>(a, b);
    case 4: return map_rule<4>(a, b);
    case 6: return map_rule<6>(a, b);
    case 8: return map_rule<8>(a, b);
    default: throw DimensionError("unsupported Gauss-Legendre order " + std::to_string(p));
  }
}

cplx central_difference6(const ComplexFn& f, double x, double h) {
  return (-f(x - 3 * h) + 9.0 * f(x - 2 * h) - 45.0 * f(x - h) + 45.0 * f(x + h) - 9.0 * f(x + 2 * h) +
          f(x + 3 * h)) /
         (60.0 * h);
}

int default_threads() {
  if (const char* env = std::getenv("MARCHENKO_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) threads = default_threads();
  threads = std::min(threads, n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex m;
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!failure) failure = std::current_exception();
          next = n;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace marchenko
