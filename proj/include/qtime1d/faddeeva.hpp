#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <complex>

#include "qtime1d/errors.hpp"
#include "qtime1d/numerics.hpp"

namespace qtime1d {

/// Region control for w_eval. Inside `series_radius` the Taylor series is summed, beyond
/// `asymptotic_radius` the asymptotic expansion, and in between a 40-term Weideman
/// rational approximation.
struct WAccuracyPolicy {
  double series_radius = 1.5;
  double asymptotic_radius = 7.0;
  int asym_terms = 20;
  double target_rel_err = 1e-12;

  void validate() const {
    if (!(series_radius > 0)) throw domain_error("WAccuracyPolicy: series_radius must be positive");
    if (!(asymptotic_radius > 0)) throw domain_error("WAccuracyPolicy: asymptotic_radius must be positive");
    if (asym_terms < 1) throw domain_error("WAccuracyPolicy: asym_terms must be >= 1");
    if (!(target_rel_err > 0 && target_rel_err <= 1e-6))
      throw domain_error("WAccuracyPolicy: target_rel_err must lie in (0, 1e-6]");
  }
};

namespace detail {

// Weideman (1994) coefficients for N = 40, computed once by a direct cosine sum.
struct weideman40 {
  static constexpr int N = 40;
  long double L;
  std::array<long double, N> c{};  // c[n-1] multiplies Z^{n-1}

  weideman40() {
    constexpr int M = 2 * N;
    L = std::sqrt(static_cast<long double>(N) / std::sqrt(2.0L));
    const long double pl = 3.141592653589793238462643383279502884L;
    std::array<long double, M> f{};  // f[k] for k = 0..M-1 (even in k)
    for (int k = 0; k < M; ++k) {
      const long double th = k * pl / M;
      const long double t = L * std::tan(th / 2);
      f[k] = std::exp(-t * t) * (L * L + t * t);
    }
    for (int n = 1; n <= N; ++n) {
      long double s = f[0];
      for (int k = 1; k < M; ++k) s += 2 * f[k] * std::cos(pl * k * n / M);
      c[n - 1] = s / (2 * M);
    }
  }

  std::complex<double> operator()(std::complex<double> z) const {
    using lc = std::complex<long double>;
    const lc zz(z.real(), z.imag());
    const lc iz = lc(0, 1) * zz;
    const lc den = L - iz;
    const lc Z = (L + iz) / den;
    lc p = 0;
    for (int n = N - 1; n >= 0; --n) p = p * Z + c[n];
    const lc r = 2.0L * p / (den * den) + (1.0L / std::sqrt(3.141592653589793238462643383279502884L)) / den;
    return {static_cast<double>(r.real()), static_cast<double>(r.imag())};
  }
};

inline const weideman40& weideman() {
  static const weideman40 w;
  return w;
}

// Taylor series summed until the terms stop mattering.
inline cplx w_taylor_adaptive(cplx z) {
  const cplx iz(-z.imag(), z.real());
  const cplx iz2 = iz * iz;
  cplx even = 1.0, odd = iz * (2.0 / sqrt_pi);
  cplx sum = even + odd;
  for (int n = 2; n < 400; n += 2) {
    even *= iz2 / (0.5 * n);
    odd *= iz2 / (0.5 * (n + 1));
    sum += even + odd;
    if (std::abs(even) + std::abs(odd) < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Asymptotic series without the exponential term, stopping at the smallest term.
inline cplx w_asym_upper(cplx z, int max_terms) {
  const cplx inv2z2 = 1.0 / (2.0 * z * z);
  cplx term = 1.0, sum = 1.0;
  double last = 1.0;
  for (int m = 1; m <= max_terms; ++m) {
    term *= static_cast<double>(2 * m - 1) * inv2z2;
    const double a = std::abs(term);
    if (a > last) break;
    sum += term;
    last = a;
    if (a < 1e-17 * std::abs(sum)) break;
  }
  return cplx(0, 1) / (sqrt_pi * z) * sum;
}

// Upper half plane, Re z >= 0.
inline cplx w_quadrant(cplx z, const WAccuracyPolicy& pol) {
  const double r = std::abs(z);
  if (r < pol.series_radius) return w_taylor_adaptive(z);
  if (r >= std::max(pol.asymptotic_radius, pol.series_radius)) return w_asym_upper(z, pol.asym_terms);
  return weideman()(z);
}

}  // namespace detail

/// Partial sum of the Taylor series: sum_{n < n_terms} (iz)^n / Gamma(n/2 + 1).
inline cplx w_series(cplx z, int n_terms) {
  if (n_terms < 1) throw domain_error("w_series: n_terms must be >= 1");
  const cplx iz(-z.imag(), z.real());
  const cplx iz2 = iz * iz;
  cplx even = 1.0, odd = iz * (2.0 / sqrt_pi);
  cplx sum = even;
  if (n_terms > 1) sum += odd;
  for (int n = 2; n < n_terms; ++n) {
    if (n % 2 == 0) {
      even *= iz2 / (0.5 * n);
      sum += even;
    } else {
      odd *= iz2 / (0.5 * n);
      sum += odd;
    }
  }
  return sum;
}

/// Asymptotic expansion with m_terms correction terms; adds 2 exp(-z^2) below the real axis.
inline cplx w_asymptotic(cplx z, int m_terms) {
  if (z == cplx(0)) throw domain_error("w_asymptotic: z = 0");
  if (m_terms < 0) throw domain_error("w_asymptotic: m_terms must be >= 0");
  const cplx inv2z2 = 1.0 / (2.0 * z * z);
  cplx term = 1.0, sum = 1.0;
  for (int m = 1; m <= m_terms; ++m) {
    term *= static_cast<double>(2 * m - 1) * inv2z2;
    sum += term;
  }
  cplx w = cplx(0, 1) / (sqrt_pi * z) * sum;
  if (z.imag() < 0) w += 2.0 * std::exp(-z * z);
  return w;
}

/// Faddeeva function w(z) = exp(-z^2) erfc(-iz) on the whole plane.
inline cplx w_eval(cplx z, const WAccuracyPolicy& pol = {}) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw domain_error("w_eval: non-finite argument");
  pol.validate();
  const double x = z.real(), y = z.imag();
  cplx w;
  if (y >= 0) {
    w = detail::w_quadrant({std::abs(x), y}, pol);
    if (x < 0) w = std::conj(w);
    if (y == 0) w.real(std::exp(-x * x));
  } else {
    // w(z) = 2 exp(-z^2) - w(-z), with -z in the upper half plane
    cplx wm = detail::w_quadrant({std::abs(x), -y}, pol);
    if (-x < 0) wm = std::conj(wm);
    w = 2.0 * std::exp(-z * z) - wm;
  }
  if (!std::isfinite(w.real()) || !std::isfinite(w.imag()))
    throw range_error("w_eval: result overflows double precision");
  return w;
}

struct WIdentityResiduals {
  double reflection = 0;     // |w(-z) - (2e^{-z^2} - w(z))|, scaled
  double conjugation = 0;    // |w(conj z) - conj w(-z)| / |w(-z)|
  double region_switch = 0;  // same point evaluated on both sides of each switch radius
  std::size_t points = 0;
};

/// Max identity residuals over a polar grid of radii in [0.05, 12].
inline WIdentityResiduals w_identity_residuals(std::size_t n_r = 40, std::size_t n_theta = 64) {
  WIdentityResiduals out;
  for (std::size_t i = 0; i < n_r; ++i) {
    const double r = 0.05 * std::pow(240.0, static_cast<double>(i) / static_cast<double>(n_r - 1));
    for (std::size_t j = 0; j < n_theta; ++j) {
      const cplx z = std::polar(r, 2 * pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n_theta));
      const cplx w = w_eval(z), wm = w_eval(-z), e = std::exp(-z * z);
      out.reflection = std::max(out.reflection, std::abs(wm - (2.0 * e - w)) / (1 + std::abs(w)) / std::max(1.0, std::abs(e)));
      out.conjugation = std::max(out.conjugation, std::abs(w_eval(std::conj(z)) - std::conj(wm)) / std::abs(wm));
      ++out.points;
    }
  }
  WAccuracyPolicy in, out_s, far_in, far_out;
  in.series_radius = 2.0;
  out_s.series_radius = 1.0;
  far_in.asymptotic_radius = 8.0;
  far_out.asymptotic_radius = 6.5;
  for (std::size_t j = 0; j < n_theta; ++j) {
    const double th = 2 * pi * (static_cast<double>(j) + 0.5) / static_cast<double>(n_theta);
    if (std::sin(th) < 0) continue;  // the switches act on the upper half plane
    const cplx z1 = std::polar(1.5, th), z2 = std::polar(7.0, th);
    const cplx a = w_eval(z1, in), b = w_eval(z2, far_in);
    out.region_switch = std::max({out.region_switch, std::abs(a - w_eval(z1, out_s)) / std::abs(a),
                                  std::abs(b - w_eval(z2, far_out)) / std::abs(b)});
  }
  return out;
}

}  // namespace qtime1d
