#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace qtime1d {

/// Real 2x2 matrix acting on (psi, psi').
struct Mat2 {
  double a = 1, b = 0, c = 0, d = 1;

  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c, c * o.b + d * o.d};
  }
  double det() const { return a * d - b * c; }
  double norm() const { return std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d); }
};

/// Local squared wavenumber 2m(E - v)/hbar^2.
inline double local_q2(double e, double v, double mass, double hbar) {
  return 2 * mass * (e - v) / (hbar * hbar);
}

/// Unscaled map (psi, psi')(x) -> (psi, psi')(x + delta) in a region of constant q2.
inline Mat2 segment_matrix(double q2, double delta) {
  if (q2 > 0) {
    const double k = std::sqrt(q2);
    const double c = std::cos(k * delta), s = std::sin(k * delta);
    return {c, s / k, -k * s, c};
  }
  if (q2 < 0) {
    const double kap = std::sqrt(-q2);
    const double c = std::cosh(kap * delta), s = std::sinh(kap * delta);
    return {c, s / kap, kap * s, c};
  }
  return {1, delta, 0, 1};
}

/// Wavefunction and derivative carried with a separate log scale so that products over
/// long evanescent stretches cannot overflow. True values are (psi, dpsi) * exp(log_scale).
template <class T>
struct ScaledState {
  T psi{}, dpsi{};
  double log_scale = 0;

  void normalize() {
    const double n = std::max(std::abs(psi), std::abs(dpsi));
    if (n > 0 && std::isfinite(n)) {
      psi /= n;
      dpsi /= n;
      log_scale += std::log(n);
    }
  }

  /// Advance by delta (either sign) through a region of constant q2.
  void step(double q2, double delta) {
    if (q2 < 0) {
      const double kap = std::sqrt(-q2);
      const double arg = kap * delta;
      if (std::abs(arg) > 20) {
        const double e = std::exp(-2 * std::abs(arg));
        const double c = 0.5 * (1 + e);
        const double s = (arg > 0 ? 0.5 : -0.5) * (1 - e);
        const T p = c * psi + (s / kap) * dpsi;
        const T dp = (kap * s) * psi + c * dpsi;
        psi = p;
        dpsi = dp;
        log_scale += std::abs(arg);
        normalize();
        return;
      }
    }
    const Mat2 m = segment_matrix(q2, delta);
    const T p = m.a * psi + m.b * dpsi;
    const T dp = m.c * psi + m.d * dpsi;
    psi = p;
    dpsi = dp;
    normalize();
  }
};

}  // namespace qtime1d
