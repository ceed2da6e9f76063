#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "qtime1d/errors.hpp"
#include "qtime1d/numerics.hpp"
#include "qtime1d/potential.hpp"
#include "qtime1d/scattering.hpp"

namespace qtime1d {

using CMat2 = std::array<std::array<cplx, 2>, 2>;

/// Dwell time in [a, b] of the stationary left-incidence state at momentum p.
inline double dwell_time_stationary(const PiecewisePotential& pot, double a, double b, double p) {
  if (!(p > 0)) throw domain_error("dwell_time_stationary: momentum must be positive");
  if (b < a) throw domain_error("dwell_time_stationary: need a <= b");
  if (b == a) return 0;
  const ScatteringSolution sol(pot, p);
  const double m = pot.mass(), hb = pot.hbar(), e = p * p / (2 * m);
  std::vector<double> cuts{a, b};
  for (const auto& s : pot.segments()) {
    if (s.x_lo > a && s.x_lo < b) cuts.push_back(s.x_lo);
    if (s.x_hi > a && s.x_hi < b) cuts.push_back(s.x_hi);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  auto dens = [&](double x) { return std::norm(sol.wave(x).first); };
  double integral = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double lo = cuts[i], hi = cuts[i + 1];
    const double kloc = std::sqrt(std::abs(local_q2(e, pot(0.5 * (lo + hi)), m, hb)));
    const double rate = std::max(kloc, sol.k());
    const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil((hi - lo) * rate / 4)));
    const double w = (hi - lo) / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) integral += num::gauss32(dens, lo + j * w, lo + (j + 1) * w);
  }
  // |<x|p+>|^2 = |psi|^2 / h, incident flux p/(m h)
  return integral * m / p;
}

/// Phase time for transmission: m [b - x0 + hbar Phi_T'(p)] / p.
inline double phase_time_T(double x0, double b, double p, const PhaseCurve& curve) {
  if (curve.kind != PhaseKind::T) throw domain_error("phase_time_T needs a T phase curve");
  return curve.mass * (b - x0 + curve.hbar * curve.derivative(p)) / p;
}

/// Phase time for reflection: m [-a - x0 + hbar Phi_R'(p)] / p.
inline double phase_time_R(double x0, double a, double p, const PhaseCurve& curve) {
  if (curve.kind != PhaseKind::R_l) throw domain_error("phase_time_R needs an R_l phase curve");
  return curve.mass * (-a - x0 + curve.hbar * curve.derivative(p)) / p;
}

/// Phase time referred to the barrier edges [0, d].
inline double extrapolated_phase_time(double d, double p, const PhaseCurve& curve) {
  return phase_time_T(0, d, p, curve);
}

/// S matrix at energy e, indexed [out][in] with channel 0 = "+" and 1 = "-".
inline CMat2 s_matrix(const PiecewisePotential& pot, double e) {
  if (!(e > 0)) throw domain_error("S matrix: energy must be positive");
  const ScatteringSolution sol(pot, std::sqrt(2 * pot.mass() * e));
  const auto& a = sol.amplitudes();
  return {{{a.t, a.r_r}, {a.r_l, a.t}}};
}

struct DelayMatrix {
  double e = 0;
  std::array<std::array<double, 2>, 2> dt{};
  std::array<std::array<bool, 2>, 2> defined{};
};

namespace detail {
inline double energy_step(double e) { return 1e-5 * e; }

template <class SFn>
CMat2 s_derivative(SFn&& s_of_e, double e) {
  const double h = energy_step(e);
  const CMat2 sp = s_of_e(e + h), sm = s_of_e(e - h), sp2 = s_of_e(e + h / 2), sm2 = s_of_e(e - h / 2);
  CMat2 d{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const cplx d1 = (sp[i][j] - sm[i][j]) / (2 * h);
      const cplx d2 = (sp2[i][j] - sm2[i][j]) / h;
      d[i][j] = (4.0 * d2 - d1) / 3.0;
    }
  return d;
}
}  // namespace detail

/// Delay-time matrix Re[-i hbar S'/S] entrywise; entries with |S| < 1e-12 are flagged undefined.
inline DelayMatrix delay_matrix(const PiecewisePotential& pot, double e) {
  auto sfn = [&](double en) { return s_matrix(pot, en); };
  const CMat2 s = sfn(e);
  const CMat2 ds = detail::s_derivative(sfn, e);
  DelayMatrix out;
  out.e = e;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      out.defined[i][j] = std::abs(s[i][j]) >= 1e-12;
      out.dt[i][j] = out.defined[i][j] ? pot.hbar() * std::imag(ds[i][j] / s[i][j]) : std::nan("");
    }
  return out;
}

struct QMatrix {
  double e = 0;
  CMat2 q{};
};

/// Q = i hbar S dS^dagger/dE for any S(E) callable.
template <class SFn>
QMatrix q_matrix_from(SFn&& s_of_e, double e, double hbar) {
  const CMat2 s = s_of_e(e);
  const CMat2 ds = detail::s_derivative(s_of_e, e);
  QMatrix out;
  out.e = e;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      cplx acc = 0;
      for (int k = 0; k < 2; ++k) acc += s[i][k] * std::conj(ds[j][k]);
      out.q[i][j] = cplx(0, hbar) * acc;
    }
  return out;
}

inline QMatrix q_matrix(const PiecewisePotential& pot, double e) {
  if (!(e > 0)) throw domain_error("q_matrix: energy must be positive");
  return q_matrix_from([&](double en) { return s_matrix(pot, en); }, e, pot.hbar());
}

/// Isolated resonance with factorised coupling A = gamma gamma^dagger.
struct BreitWignerModel {
  double e0 = 0;
  double gamma = 0;
  std::array<cplx, 2> gamma_vec{};
  double hbar = 1;

  static BreitWignerModel from_couplings(double e0, cplx g_plus, cplx g_minus, double hbar = 1) {
    BreitWignerModel m{e0, std::norm(g_plus) + std::norm(g_minus), {g_plus, g_minus}, hbar};
    m.validate();
    return m;
  }

  void validate() const {
    if (!(gamma > 0)) throw domain_error("Breit-Wigner width must be positive");
    const double g = std::norm(gamma_vec[0]) + std::norm(gamma_vec[1]);
    if (std::abs(g - gamma) > 1e-12 * gamma) throw domain_error("Breit-Wigner: width must equal sum |gamma_a|^2");
  }

  CMat2 a_matrix() const {
    CMat2 a{};
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) a[i][j] = gamma_vec[i] * std::conj(gamma_vec[j]);
    return a;
  }
};

inline CMat2 breit_wigner_s(const BreitWignerModel& m, double e) {
  m.validate();
  const CMat2 a = m.a_matrix();
  const cplx f = cplx(0, -1) / cplx(e - m.e0, m.gamma / 2);
  CMat2 s{};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) s[i][j] = (i == j ? 1.0 : 0.0) + f * a[i][j];
  return s;
}

/// Largest lifetime-matrix eigenvalue hbar Gamma / [(E - E0)^2 + Gamma^2/4].
inline double breit_wigner_qmax(const BreitWignerModel& m, double e) {
  m.validate();
  return m.hbar * m.gamma / ((e - m.e0) * (e - m.e0) + m.gamma * m.gamma / 4);
}

/// Closed-form Q = (A / Gamma) q_m.
inline QMatrix breit_wigner_q(const BreitWignerModel& m, double e) {
  const CMat2 a = m.a_matrix();
  const double qm = breit_wigner_qmax(m, e);
  QMatrix out;
  out.e = e;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.q[i][j] = a[i][j] * (qm / m.gamma);
  return out;
}

enum class BoundVariant { naive, rigorous };

/// Lower bounds on the transmission delay. naive: d_or_b is the barrier length d.
/// rigorous: d_or_b is the half-width b of an even potential on [-b, b].
inline double negative_delay_bound(double p, double d_or_b, BoundVariant variant, double mass = 1, double hbar = 1) {
  if (!(p > 0)) throw domain_error("negative_delay_bound: momentum must be positive");
  if (variant == BoundVariant::naive) return -mass * d_or_b / p;
  const double d = 2 * d_or_b;
  return mass / p * (-d - hbar / (2 * p));
}

/// Oscillatory form of the rigorous bound, using the eigenphases. Follows from
/// d(delta0)/dp >= -b/hbar - sin(2pb/hbar + 2 delta0)/(2p) and the odd analogue.
inline double sharp_delay_bound(double p, double b, double delta0, double delta1, double mass = 1, double hbar = 1) {
  if (!(p > 0)) throw domain_error("sharp_delay_bound: momentum must be positive");
  const double ph = 2 * p * b / hbar;
  return mass / p * (-2 * b - hbar / (2 * p) * (std::sin(ph + 2 * delta0) - std::sin(ph + 2 * delta1)));
}

struct HartmanWidth {
  double p_r = 0;      // first above-barrier transmission resonance
  double kappa_c = 0;  // decay constant at p_c
  double delta_exact = 0;
  double delta_approx = 0;
};

/// Packet width separating the Hartman plateau from quasiclassical growth for a single
/// rectangular barrier.
inline HartmanWidth hartman_transition_width(const PiecewisePotential& pot, double p_c) {
  const Segment* bar = nullptr;
  for (const auto& s : pot.segments()) {
    if (s.v > 0) {
      if (bar) throw domain_error("hartman_transition_width: needs a single rectangular barrier");
      bar = &s;
    } else if (s.v != 0) {
      throw domain_error("hartman_transition_width: needs a single rectangular barrier");
    }
  }
  if (!bar) throw domain_error("hartman_transition_width: no barrier segment");
  const double m = pot.mass(), hb = pot.hbar(), v0 = bar->v, d = bar->x_hi - bar->x_lo;
  const double e_c = p_c * p_c / (2 * m);
  if (!(p_c > 0) || !(e_c < v0)) throw domain_error("hartman_transition_width: need 0 < E_c < V0");

  const double p0 = std::sqrt(2 * m * v0);
  auto t2 = [&](double p) { return std::norm(amplitudes(pot, p).t); };
  constexpr int n = 4000;
  const double h = 2 * p0 / n;
  double fm = t2(p0 + h), f0 = t2(p0 + 2 * h);
  double p_r = -1;
  for (int i = 3; i <= n; ++i) {
    const double fp = t2(p0 + i * h);
    if (f0 >= fm && f0 >= fp) {
      p_r = num::brent_maximize(t2, p0 + (i - 2) * h, p0 + i * h).first;
      break;
    }
    fm = f0;
    f0 = fp;
  }
  if (p_r < 0) throw resolution_error("hartman_transition_width: no transmission resonance in (p0, 3 p0]");

  HartmanWidth out;
  out.p_r = p_r;
  out.kappa_c = std::sqrt(2 * m * (v0 - e_c)) / hb;
  const double lnT = std::log(std::abs(amplitudes(pot, p_c).t));
  out.delta_exact = hb * std::sqrt(-lnT) / std::abs(p_r - p_c);
  out.delta_approx = hb * std::sqrt(out.kappa_c * d) / std::abs(p_r - p_c);
  return out;
}

}  // namespace qtime1d
