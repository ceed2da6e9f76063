#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "qtime1d/errors.hpp"

namespace qtime1d {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double sqrt_pi = 1.7724538509055160273;

namespace num {

/// Fixed 32-node Gauss-Legendre rule on [a, b]; works for real or complex integrands.
template <class F>
auto gauss32(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 32>::integrate(std::forward<F>(f), a, b);
}

/// Fixed 10-node Gauss-Legendre rule, cheap panels for oscillatory sums.
template <class F>
auto gauss10(F&& f, double a, double b) {
  return boost::math::quadrature::gauss<double, 10>::integrate(std::forward<F>(f), a, b);
}

/// Adaptive Gauss-Kronrod (15/31). Returns the value; `err` receives the estimate.
template <class F>
auto adaptive(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 20,
              double* err = nullptr) {
  double e = 0;
  auto v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      std::forward<F>(f), a, b, max_depth, rel_tol, &e);
  if (err) *err = e;
  return v;
}

/// Adaptive Gauss-Kronrod (15/31) bisection against an absolute tolerance, for integrals that
/// may nearly cancel. Stops on err <= max(abs_tol, rel_tol |value|, 1e-14 L1) or at max_depth;
/// the L1 floor is the rounding level of the rule itself.
template <class F>
double adaptive_abs(F&& f, double a, double b, double abs_tol, double rel_tol = 1e-13, unsigned max_depth = 18) {
  double e = 0, l1 = 0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &e, &l1);
  e *= 0.5 * (b - a);  // Boost reports the single-panel error on the reference interval
  if (max_depth == 0 || e <= std::max({abs_tol, rel_tol * std::abs(v), 1e-14 * l1})) return v;
  const double m = 0.5 * (a + b);
  return adaptive_abs(f, a, m, abs_tol / 2, rel_tol, max_depth - 1) + adaptive_abs(f, m, b, abs_tol / 2, rel_tol, max_depth - 1);
}

/// Adaptive integral over consecutive breakpoints.
template <class F>
auto adaptive_pieces(F&& f, const std::vector<double>& breaks, double rel_tol = 1e-12,
                     unsigned max_depth = 20) {
  using R = decltype(f(0.0));
  R sum{};
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) sum += adaptive(f, breaks[i], breaks[i + 1], rel_tol, max_depth);
  }
  return sum;
}

/// Composite Simpson on uniformly spaced samples (odd count).
template <class T>
T simpson(const std::vector<T>& y, double h, std::size_t stride = 1) {
  const std::size_t n = (y.size() - 1) / stride;
  if (n < 2 || n % 2) throw config_error("simpson: need an even number of intervals");
  T s = y.front() + y[n * stride];
  for (std::size_t i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * y[i * stride];
  return s * (h * stride / 3.0);
}

/// Central difference with one Richardson level: (4 D(h/2) - D(h)) / 3.
template <class F>
auto richardson_derivative(F&& f, double x, double h) {
  auto d1 = (f(x + h) - f(x - h)) / (2 * h);
  auto d2 = (f(x + h / 2) - f(x - h / 2)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

/// Derivative at node i of a (possibly non-uniform) tabulated function from a 5-point
/// Lagrange stencil centred on i.
inline double lagrange5_derivative(const std::vector<double>& x, const std::vector<double>& y,
                                   std::size_t i) {
  if (i < 2 || i + 2 >= x.size()) throw domain_error("5-point derivative needs two nodes on each side");
  double d = 0;
  const double xi = x[i];
  for (std::size_t j = i - 2; j <= i + 2; ++j) {
    // derivative of the j-th Lagrange basis at xi
    double lj = 0;
    if (j == i) {
      for (std::size_t k = i - 2; k <= i + 2; ++k)
        if (k != i) lj += 1.0 / (xi - x[k]);
    } else {
      double num = 1, den = 1;
      for (std::size_t k = i - 2; k <= i + 2; ++k) {
        if (k == j) continue;
        den *= x[j] - x[k];
        if (k != i) num *= xi - x[k];
      }
      lj = num / den;
    }
    d += lj * y[j];
  }
  return d;
}

/// Derivative of tabulated data at an arbitrary interior x via the 5-point Lagrange
/// interpolant through the nearest nodes.
inline double lagrange5_derivative_at(const std::vector<double>& x, const std::vector<double>& y,
                                      double at) {
  auto it = std::lower_bound(x.begin(), x.end(), at);
  std::size_t i = static_cast<std::size_t>(it - x.begin());
  if (i > 0 && (i == x.size() || at - x[i - 1] < x[i] - at)) --i;
  if (i < 2 || i + 2 >= x.size()) throw domain_error("point too close to the edge of the tabulated grid");
  double d = 0;
  for (std::size_t j = i - 2; j <= i + 2; ++j) {
    double den = 1;
    for (std::size_t k = i - 2; k <= i + 2; ++k)
      if (k != j) den *= x[j] - x[k];
    // d/dx prod_{k != j} (x - x_k)
    double s = 0;
    for (std::size_t m = i - 2; m <= i + 2; ++m) {
      if (m == j) continue;
      double prod = 1;
      for (std::size_t k = i - 2; k <= i + 2; ++k)
        if (k != j && k != m) prod *= at - x[k];
      s += prod;
    }
    d += y[j] * s / den;
  }
  return d;
}

/// Bisection root of a bracketed sign change, absolute tolerance on x.
template <class F>
double bisect(F&& f, double lo, double hi, double tol) {
  double flo = f(lo);
  for (int it = 0; it < 400 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0) return mid;
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Brent maximisation of f on [a, b]; returns (argmax, max).
template <class F>
std::pair<double, double> brent_maximize(F&& f, double a, double b, int bits = 50) {
  auto r = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, a, b, bits);
  return {r.first, -r.second};
}

/// Least-squares slope of ln y against ln x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

inline std::vector<double> linspace(double a, double b, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  v.back() = b;
  return v;
}

inline std::vector<double> logspace(double a, double b, std::size_t n) {
  auto v = linspace(std::log(a), std::log(b), n);
  for (auto& e : v) e = std::exp(e);
  v.front() = a;
  v.back() = b;
  return v;
}

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  a = std::remainder(a, 2 * pi);
  if (a <= -pi) a += 2 * pi;
  return a;
}

}  // namespace num
}  // namespace qtime1d
