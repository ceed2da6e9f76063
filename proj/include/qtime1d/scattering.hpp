#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include "qtime1d/errors.hpp"
#include "qtime1d/numerics.hpp"
#include "qtime1d/parallel.hpp"
#include "qtime1d/potential.hpp"
#include "qtime1d/transfer.hpp"

namespace qtime1d {

struct ScatteringAmplitudes {
  double p = 0;
  cplx t{1, 0};
  cplx r_l{0, 0};
  cplx r_r{0, 0};
  /// arg t, still meaningful when |t| underflows.
  double phi_t = 0;
};

/// Stationary left-incidence state psi = e^{ikx} + r_l e^{-ikx} (x < a), t e^{ikx} (x > b),
/// plus the right-incidence amplitudes. Unit incident amplitude; multiply by h^{-1/2} for
/// the delta-normalised state.
class ScatteringSolution {
 public:
  ScatteringSolution(const PiecewisePotential& pot, double p)
      : segs_(pot.segments()), m_(pot.mass()), hbar_(pot.hbar()) {
    if (!(p > 0) || !std::isfinite(p)) throw domain_error("amplitudes: momentum must be positive, got " + std::to_string(p));
    k_ = p / hbar_;
    e_ = p * p / (2 * m_);
    amp_.p = p;
    if (segs_.empty()) return;
    const double a = segs_.front().x_lo, b = segs_.back().x_hi;
    const cplx ik(0, k_);

    // right -> left sweep for left incidence
    ScaledState<cplx> st{std::exp(ik * b), ik * std::exp(ik * b), 0.0};
    states_.resize(segs_.size());
    for (std::size_t j = segs_.size(); j-- > 0;) {
      states_[j] = st;
      st.step(local_q2(e_, segs_[j].v, m_, hbar_), segs_[j].x_lo - segs_[j].x_hi);
    }
    a_scaled_ = 0.5 * (st.psi + st.dpsi / ik) * std::exp(-ik * a);
    const cplx b_scaled = 0.5 * (st.psi - st.dpsi / ik) * std::exp(ik * a);
    log_scale_ = st.log_scale;
    amp_.phi_t = -std::arg(a_scaled_);
    amp_.t = std::polar(std::exp(-log_scale_) / std::abs(a_scaled_), amp_.phi_t);
    amp_.r_l = b_scaled / a_scaled_;

    // left -> right sweep for right incidence
    ScaledState<cplx> sr{std::exp(-ik * a), -ik * std::exp(-ik * a), 0.0};
    for (const auto& s : segs_) sr.step(local_q2(e_, s.v, m_, hbar_), s.x_hi - s.x_lo);
    const cplx c_scaled = 0.5 * (sr.psi - sr.dpsi / ik) * std::exp(ik * b);
    const cplx d_scaled = 0.5 * (sr.psi + sr.dpsi / ik) * std::exp(-ik * b);
    t_right_ = std::polar(std::exp(-sr.log_scale) / std::abs(c_scaled), -std::arg(c_scaled));
    amp_.r_r = d_scaled / c_scaled;
  }

  const ScatteringAmplitudes& amplitudes() const { return amp_; }
  /// Transmission amplitude for incidence from the right (equals t by time reversal).
  cplx t_right() const { return segs_.empty() ? cplx(1) : t_right_; }
  double k() const { return k_; }

  /// (psi, dpsi/dx) of the unit-incidence left state.
  std::pair<cplx, cplx> wave(double x) const {
    const cplx ik(0, k_);
    if (segs_.empty() || x >= segs_.back().x_hi) {
      const cplx v = amp_.t * std::exp(ik * x);
      return {v, ik * v};
    }
    if (x <= segs_.front().x_lo) {
      const cplx in = std::exp(ik * x), out = amp_.r_l * std::exp(-ik * x);
      return {in + out, ik * (in - out)};
    }
    std::size_t j = 0;
    while (j + 1 < segs_.size() && x >= segs_[j].x_hi) ++j;
    ScaledState<cplx> st = states_[j];
    st.step(local_q2(e_, segs_[j].v, m_, hbar_), x - segs_[j].x_hi);
    const cplx f = std::exp(st.log_scale - log_scale_) / a_scaled_;
    return {st.psi * f, st.dpsi * f};
  }

 private:
  std::vector<Segment> segs_;
  double m_, hbar_, k_ = 0, e_ = 0;
  ScatteringAmplitudes amp_;
  std::vector<ScaledState<cplx>> states_;  // state at x_hi of each segment
  cplx a_scaled_{1, 0};
  double log_scale_ = 0;
  cplx t_right_{1, 0};
};

inline ScatteringAmplitudes amplitudes(const PiecewisePotential& pot, double p) {
  return ScatteringSolution(pot, p).amplitudes();
}

/// Planck constant h = 2 pi hbar.
inline double planck_h(double hbar) { return 2 * pi * hbar; }

struct StationaryWave {
  double p = 0;
  std::vector<double> grid;
  std::vector<cplx> psi;
};

/// Delta-normalised left-incidence scattering state on a grid.
inline StationaryWave scattering_wave(const PiecewisePotential& pot, double p, const std::vector<double>& grid) {
  ScatteringSolution sol(pot, p);
  const double norm = 1 / std::sqrt(planck_h(pot.hbar()));
  StationaryWave w{p, grid, {}};
  w.psi.reserve(grid.size());
  for (double x : grid) w.psi.push_back(norm * sol.wave(x).first);
  return w;
}

enum class PhaseKind { T, R_l, R_r, delta0, delta1 };

inline std::string to_string(PhaseKind k) {
  switch (k) {
    case PhaseKind::T: return "T";
    case PhaseKind::R_l: return "R_l";
    case PhaseKind::R_r: return "R_r";
    case PhaseKind::delta0: return "delta0";
    case PhaseKind::delta1: return "delta1";
  }
  return "?";
}

struct PhaseCurve {
  std::vector<double> momenta;
  std::vector<double> phi;
  PhaseKind kind = PhaseKind::T;
  double mass = 1, hbar = 1;

  /// dphi/dp at p from the 5-point Lagrange interpolant of the curve.
  double derivative(double p) const {
    if (p <= momenta.front() || p >= momenta.back()) throw domain_error("phase derivative requested at the grid edge");
    return num::lagrange5_derivative_at(momenta, phi, p);
  }
};

/// Eigenphase shifts (delta0, delta1) of a potential symmetric about its support midpoint,
/// principal values in (-pi/2, pi/2].
inline std::pair<double, double> eigenphases(const PiecewisePotential& pot, double p) {
  if (!pot.is_symmetric()) throw domain_error("eigenphases: potential is not symmetric about its midpoint");
  const auto amp = amplitudes(pot, p);
  const double c = 0.5 * (pot.support_lo() + pot.support_hi());
  const cplx rc = amp.r_l * std::exp(cplx(0, -2 * p * c / pot.hbar()));
  return {0.5 * std::arg(amp.t + rc), 0.5 * std::arg(amp.t - rc)};
}

namespace detail {

// Raw (wrapped) phase for a kind; for the eigenphase kinds this is arg e^{2 i delta}.
inline double raw_phase(const PiecewisePotential& pot, double p, PhaseKind kind) {
  const ScatteringSolution sol(pot, p);
  const auto& a = sol.amplitudes();
  switch (kind) {
    case PhaseKind::T: return a.phi_t;
    case PhaseKind::R_l: return std::arg(a.r_l);
    case PhaseKind::R_r: return std::arg(a.r_r);
    case PhaseKind::delta0:
    case PhaseKind::delta1: {
      const double c = 0.5 * (pot.support_lo() + pot.support_hi());
      const cplx rc = a.r_l * std::exp(cplx(0, -2 * p * c / pot.hbar()));
      return std::arg(kind == PhaseKind::delta0 ? a.t + rc : a.t - rc);
    }
  }
  return 0;
}

}  // namespace detail

/// Continuous phase on an ascending grid, anchored at the largest momentum (principal
/// value there) and unwrapped downwards. Intervals where the wrapped phase moves by pi/2
/// or more are bisected, up to 12 levels; the refined nodes are part of the result.
inline PhaseCurve phase_curve(const PiecewisePotential& pot, const std::vector<double>& momenta, PhaseKind kind) {
  if (momenta.size() < 2) throw domain_error("phase_curve: need at least two momenta");
  for (std::size_t i = 0; i + 1 < momenta.size(); ++i)
    if (!(momenta[i] < momenta[i + 1])) throw domain_error("phase_curve: momenta must be strictly ascending");
  if ((kind == PhaseKind::delta0 || kind == PhaseKind::delta1) && !pot.is_symmetric())
    throw domain_error("phase_curve: eigenphases need a symmetric potential");

  const auto raw = parallel_map<double>(momenta.size(), [&](std::size_t i) { return detail::raw_phase(pot, momenta[i], kind); });

  constexpr int max_levels = 12;
  std::vector<double> ps{momenta.back()}, rs{raw.back()};  // built from the top, descending
  // refine interval (lo, hi) given raw phases; push nodes strictly below hi, down to lo inclusive
  auto refine = [&](auto&& self, double plo, double rlo, double phi, double rhi, int level) -> void {
    if (std::abs(num::wrap_angle(rhi - rlo)) >= pi / 2) {
      if (level >= max_levels)
        throw resolution_error("phase_curve: unwrap step >= pi/2 on [" + std::to_string(plo) + ", " +
                               std::to_string(phi) + "] after " + std::to_string(max_levels) + " refinements");
      const double pm = 0.5 * (plo + phi);
      const double rm = detail::raw_phase(pot, pm, kind);
      self(self, pm, rm, phi, rhi, level + 1);
      self(self, plo, rlo, pm, rm, level + 1);
      return;
    }
    ps.push_back(plo);
    rs.push_back(rlo);
  };
  for (std::size_t i = momenta.size() - 1; i-- > 0;) refine(refine, momenta[i], raw[i], momenta[i + 1], raw[i + 1], 0);

  const bool half = kind == PhaseKind::delta0 || kind == PhaseKind::delta1;
  const double scale = half ? 0.5 : 1.0;
  PhaseCurve out;
  out.kind = kind;
  out.mass = pot.mass();
  out.hbar = pot.hbar();
  const std::size_t n = ps.size();
  out.momenta.resize(n);
  out.phi.resize(n);
  double acc = num::wrap_angle(rs[0]);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) acc += num::wrap_angle(rs[i] - rs[i - 1]);
    out.momenta[n - 1 - i] = ps[i];
    out.phi[n - 1 - i] = scale * acc;
  }
  return out;
}

struct LevinsonResult {
  double phase_drop = 0;  // Phi_T(0+) - Phi_T(p_max)
  int n_b = 0;
  double residual = 0;
};

/// Levinson check for the generic case T(0) = 0.
inline LevinsonResult levinson_check(const PiecewisePotential& pot, double p_max, std::size_t n_grid) {
  if (pot.is_free()) throw domain_error("levinson_check: not applicable to free motion (T = 1, no zero at p = 0)");
  if (n_grid < 8) throw domain_error("levinson_check: n_grid must be >= 8");
  const double vscale = std::sqrt(2 * pot.mass() * pot.max_abs_value());
  const double p_min = 1e-6 * vscale;
  if (!(p_max > p_min)) throw domain_error("levinson_check: p_max too small");
  const auto amp0 = amplitudes(pot, p_min);
  if (std::abs(amp0.t) > 1e-2)
    throw domain_error("levinson_check: T does not vanish at p -> 0 (zero-energy resonance); generic branch not applicable");
  const auto curve = phase_curve(pot, num::logspace(p_min, p_max, n_grid), PhaseKind::T);
  if (std::abs(curve.phi.back()) >= 0.01)
    throw domain_error("levinson_check: |Phi_T(p_max)| >= 0.01, increase p_max");
  LevinsonResult r;
  r.phase_drop = curve.phi.front() - curve.phi.back();
  r.n_b = count_bound_states(pot).n_b;
  r.residual = std::abs(r.phase_drop - pi * (r.n_b - 0.5));
  return r;
}

}  // namespace qtime1d
