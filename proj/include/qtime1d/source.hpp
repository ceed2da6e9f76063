#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "qtime1d/errors.hpp"
#include "qtime1d/faddeeva.hpp"
#include "qtime1d/numerics.hpp"
#include "qtime1d/parallel.hpp"

namespace qtime1d {

/// Point source psi(0, t) = e^{-i omega0 t} Theta(t) feeding the half line x > 0 of
/// i psi_t = -psi_xx + psi (hbar = 2m = 1, unit step height).
struct SourceSpec {
  double omega0 = 0.5;
  double x = 1;

  void validate() const {
    if (!(omega0 > 0 && omega0 < 1)) throw domain_error("source: omega0 must lie in (0, 1)");
    if (!(std::isfinite(x) && x >= 0)) throw domain_error("source: x must be finite and >= 0");
  }
  double kappa0() const { return std::sqrt(1 - omega0); }
  double tau() const { return x / (2 * kappa0()); }
};

namespace detail {

struct SourceArgs {
  cplx u1, u2;   // u0', u0''
  cplx prefac;   // e^{-it + i ks^2 t}
};

inline SourceArgs source_args(const SourceSpec& s, double t) {
  const double k0 = s.kappa0(), a = s.tau() / t;
  const cplx c = cplx(1, 1) / std::sqrt(2.0) * std::sqrt(t) * k0;
  const double ks = s.x / (2 * t);
  return {c * cplx(-a, -1), c * cplx(-a, 1), std::exp(cplx(0, -t + ks * ks * t))};
}

}  // namespace detail

/// Exact field (1/2) e^{-it + i ks^2 t} [w(-u0') + w(-u0'')].
inline cplx source_exact(const SourceSpec& s, double t) {
  s.validate();
  if (!(t > 0)) throw domain_error("source: t must be positive (the field vanishes for t <= 0)");
  const auto g = detail::source_args(s, t);
  const cplx z1 = -g.u1, z2 = -g.u2;
  // z2 drops below the real axis once t > tau; reflect explicitly so the x = 0 pair cancels bit for bit
  const cplx sum = z2.imag() < 0 ? w_eval(z1) + 2.0 * std::exp(-z2 * z2) - w_eval(-z2) : w_eval(z1) + w_eval(z2);
  return 0.5 * g.prefac * sum;
}

/// Saddle contribution e^{-it + i ks^2 t} (1/u0' + 1/u0'') / (2 i sqrt(pi)).
inline cplx source_saddle(const SourceSpec& s, double t) {
  s.validate();
  if (!(t > 0)) throw domain_error("source: t must be positive");
  const auto g = detail::source_args(s, t);
  return g.prefac * (1.0 / g.u1 + 1.0 / g.u2) / (cplx(0, 2) * sqrt_pi);
}

/// Monochromatic front e^{-i omega0 t} e^{-kappa0 x}, switched on at t = tau.
inline cplx source_residue(const SourceSpec& s, double t) {
  s.validate();
  if (t < s.tau()) return 0;
  return std::exp(cplx(-s.kappa0() * s.x, -s.omega0 * t));
}

/// Steepest-descent line k = ks + r e^{-i pi/4} of the k-integral, truncated at |r| = 40/sqrt(t),
/// plus the residue at i kappa0 once the line has passed below it (t > tau).
inline cplx source_contour_quadrature(const SourceSpec& s, double t) {
  s.validate();
  if (!(t > 0)) throw domain_error("source: t must be positive");
  const double k0 = s.kappa0(), ks = s.x / (2 * t);
  const cplx d = std::exp(cplx(0, -pi / 4));
  const cplx p1(0, k0), p2(0, -k0);
  auto g = [&](double r) {
    const cplx k = ks + r * d;
    return (1.0 / (k + p1) + 1.0 / (k - p1)) * d * std::exp(-t * r * r);
  };
  const double L = 40 / std::sqrt(t);
  std::vector<double> br{-L, 0, L};
  double dmin = 1e300;
  for (const cplx p : {p1, p2}) {
    const cplx rel = (p - ks) / d;  // pole position in line coordinates
    dmin = std::min(dmin, std::abs(rel.imag()));
    for (double f : {0.0, -1.0, 1.0, -4.0, 4.0}) {
      const double b = rel.real() + f * std::abs(rel.imag());
      if (b > -L && b < L) br.push_back(b);
    }
  }
  if (dmin < 1e-8 * k0)
    throw resolution_error("source contour: pole on the steepest-descent line (t = tau)");
  std::sort(br.begin(), br.end());
  const double tol = 1e-14 / std::sqrt(t) / static_cast<double>(br.size());
  double re = 0, im = 0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    if (!(br[i + 1] > br[i])) continue;
    re += num::adaptive_abs([&](double r) { return g(r).real(); }, br[i], br[i + 1], tol, 1e-14, 16);
    im += num::adaptive_abs([&](double r) { return g(r).imag(); }, br[i], br[i + 1], tol, 1e-14, 16);
  }
  cplx integral = std::exp(cplx(0, ks * ks * t)) * cplx(re, im);
  if (t > s.tau()) integral -= cplx(0, 2 * pi) * std::exp(cplx(-k0 * s.x, k0 * k0 * t));
  return -std::exp(cplx(0, -t)) * integral / cplx(0, 2 * pi);
}

/// |residue| / |saddle| in closed form: (2 sqrt(pi)/x) e^{-kappa0 x} t^{3/2} (x^2/4t^2 + kappa0^2).
inline double pole_saddle_ratio(const SourceSpec& s, double t) {
  s.validate();
  if (!(t > 0)) throw domain_error("source: t must be positive");
  if (!(s.x > 0)) throw domain_error("source: ratio needs x > 0");
  const double k0 = s.kappa0();
  return 2 * sqrt_pi / s.x * std::exp(-k0 * s.x) * std::pow(t, 1.5) * (s.x * s.x / (4 * t * t) + k0 * k0);
}

struct TransientScales {
  double kappa0 = 0, tau = 0, t_f = 0, t_tr = 0;
  double ratio_at_tau = 0;  // e^{-kappa0 x} (2 pi kappa0 x)^{1/2}
  bool valid = false;       // tau << t_tr, taken as t_tr > 10 tau
  double x = 0;
  double omega_s(double t) const { return 1 + x * x / (4 * t * t); }
};

inline TransientScales transient_scales(const SourceSpec& s) {
  s.validate();
  if (!(s.x > 0)) throw domain_error("source: scales need x > 0");
  TransientScales r;
  r.x = s.x;
  r.kappa0 = s.kappa0();
  r.tau = s.tau();
  r.t_f = r.tau / std::sqrt(3.0);
  const double kx = r.kappa0 * s.x;
  r.t_tr = std::pow(s.x * std::exp(kx) / (2 * r.kappa0 * r.kappa0 * sqrt_pi), 2.0 / 3.0);
  r.ratio_at_tau = std::exp(-kx) * std::sqrt(2 * pi * kx);
  r.valid = r.t_tr > 10 * r.tau;
  return r;
}

/// Root of R(t) = 1 after tau (R increases there); empty when R(tau) >= 1.
inline std::optional<double> crossover_time(const SourceSpec& s) {
  const double tau = s.tau();
  if (!(tau > 0) || pole_saddle_ratio(s, tau) >= 1) return std::nullopt;
  double hi = 2 * tau;
  while (pole_saddle_ratio(s, hi) < 1) hi *= 2;
  return num::bisect([&](double t) { return pole_saddle_ratio(s, t) - 1; }, tau, hi, 1e-13 * hi);
}

struct SourceCurve {
  std::vector<double> t;
  std::vector<cplx> psi, saddle, residue;
  std::vector<double> ratio;
};

inline SourceCurve source_curve(const SourceSpec& s, const std::vector<double>& tgrid) {
  s.validate();
  struct Row {
    cplx psi, sad, res;
    double r;
  };
  const auto rows = parallel_map<Row>(tgrid.size(), [&](std::size_t i) {
    const double t = tgrid[i];
    return Row{source_exact(s, t), source_saddle(s, t), source_residue(s, t), pole_saddle_ratio(s, t)};
  });
  SourceCurve c;
  c.t = tgrid;
  for (const auto& r : rows) {
    c.psi.push_back(r.psi);
    c.saddle.push_back(r.sad);
    c.residue.push_back(r.res);
    c.ratio.push_back(r.r);
  }
  return c;
}

}  // namespace qtime1d
