#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "qtime1d/errors.hpp"
#include "qtime1d/numerics.hpp"
#include "qtime1d/parallel.hpp"
#include "qtime1d/potential.hpp"
#include "qtime1d/scattering.hpp"
#include "qtime1d/times.hpp"

namespace qtime1d {

struct GaussianPacketSpec {
  double x_c = 0;
  double p_c = 1;
  double delta = 1;
};

inline void validate(const GaussianPacketSpec& s, const PiecewisePotential& pot) {
  const double hb = pot.hbar();
  if (!(s.p_c > 0) || !(s.delta > 0) || !std::isfinite(s.x_c))
    throw domain_error("packet: need p_c > 0, delta > 0 and finite x_c");
  if (s.p_c * s.delta / hb < 3) throw domain_error("packet: p_c * delta / hbar must be >= 3");
  if (!pot.empty() && s.x_c > pot.support_lo() - 5 * s.delta)
    throw domain_error("packet: x_c must lie at least 5 delta left of the potential support");
}

/// Momentum amplitude <p|phi_in(0)>, normalised, zero outside [p_lo, p_hi]. Its phase
/// is -p x_shift / hbar, which bounds the oscillation rate for quadrature panels.
struct MomentumAmplitude {
  std::function<cplx(double)> fn;
  double p_lo = 0, p_hi = 0;
  double x_shift = 0;
  double hbar = 1;
  std::vector<double> grid;  // 2^10 + 1 Simpson nodes
  std::vector<cplx> amp;

  cplx operator()(double p) const { return (p < p_lo || p > p_hi) ? cplx(0) : fn(p); }
};

/// Normalise `raw` on [p_lo, p_hi] and tabulate it.
inline MomentumAmplitude make_amplitude(std::function<cplx(double)> raw, double p_lo, double p_hi, double x_shift,
                                        double hbar) {
  const double n2 = num::adaptive([&](double p) { return std::norm(raw(p)); }, p_lo, p_hi, 1e-13);
  if (!(n2 > 0)) throw domain_error("momentum amplitude has zero norm");
  const double c = 1 / std::sqrt(n2);
  MomentumAmplitude a;
  a.fn = [raw = std::move(raw), c](double p) { return c * raw(p); };
  a.p_lo = p_lo;
  a.p_hi = p_hi;
  a.x_shift = x_shift;
  a.hbar = hbar;
  a.grid = num::linspace(p_lo, p_hi, 1025);
  for (double p : a.grid) a.amp.push_back(a.fn(p));
  return a;
}

/// Gaussian packet restricted to p > 0 over p_c +- 6 sigma, with sigma = hbar / (sqrt(2) delta)
/// the width of |phi|, so the cut edges sit at exp(-18).
inline MomentumAmplitude packet_momentum_amplitude(const GaussianPacketSpec& s, const PiecewisePotential& pot) {
  validate(s, pot);
  const double hb = pot.hbar();
  const double sigma = hb / (std::sqrt(2.0) * s.delta);
  const double lo = std::max(s.p_c - 6 * sigma, 1e-3 * s.p_c), hi = s.p_c + 6 * sigma;
  auto raw = [s, hb](double p) {
    const double d = s.delta * (p - s.p_c) / hb;
    return std::exp(cplx(-d * d, -p * s.x_c / hb));
  };
  return make_amplitude(raw, lo, hi, s.x_c, hb);
}

/// Gaussian on the whole momentum line (no restriction to p > 0).
inline MomentumAmplitude gaussian_amplitude(double x0, double p0, double delta, double hbar = 1) {
  const double w = 7 * hbar / delta;
  auto raw = [=](double p) {
    const double d = delta * (p - p0) / hbar;
    return std::exp(cplx(-d * d, -p * x0 / hbar));
  };
  return make_amplitude(raw, p0 - w, p0 + w, x0, hbar);
}

/// Gaussian multiplied by (1 - exp(-alpha p^2/hbar^2)) Theta(p): vanishes at p = 0.
inline MomentumAmplitude suppressed_amplitude(double x0, double p0, double delta, double alpha, double hbar = 1) {
  const double w = 7 * hbar / delta;
  auto raw = [=](double p) {
    const double d = delta * (p - p0) / hbar;
    return -std::expm1(-alpha * p * p / (hbar * hbar)) * std::exp(cplx(-d * d, -p * x0 / hbar));
  };
  return make_amplitude(raw, 0.0, p0 + w, x0, hbar);
}

/// x0(p) = hbar Im(conj(phi') phi) / |phi|^2.
inline double x0_functional(const MomentumAmplitude& a, double p) {
  const double h = 1e-4 * (a.p_hi - a.p_lo);
  const cplx d = num::richardson_derivative(a.fn, p, h);
  const cplx v = a.fn(p);
  return a.hbar * std::imag(std::conj(d) * v) / std::norm(v);
}

inline double current_density(cplx psi, cplx dpsi, double mass = 1, double hbar = 1) {
  return hbar / mass * std::imag(std::conj(psi) * dpsi);
}

enum class WaveKind { in, T, R };

/// Asymptotic incident, transmitted or reflected wave at a point outside the support:
/// h^{-1/2} int dp phi(p) {1, T, R_l} exp(i(+-px - Et)/hbar), by composite Simpson with
/// nested doubling from 2^10 intervals until the Richardson residual drops below 1e-8.
class AsymptoticWave {
 public:
  AsymptoticWave(WaveKind kind, const PiecewisePotential& pot, const MomentumAmplitude& amp)
      : kind_(kind), pot_(pot), amp_(amp), m_(pot.mass()), hb_(pot.hbar()) {
    level_ = base_level;
    g_ = sample(num::linspace(amp_.p_lo, amp_.p_hi, (std::size_t{1} << level_) + 1));
    double s = 0;
    for (const auto& v : g_) s += std::abs(v);
    ref_ = s * (amp_.p_hi - amp_.p_lo) / static_cast<double>(g_.size()) / std::sqrt(planck_h(hb_));
  }

  WaveKind kind() const { return kind_; }

  /// (psi, dpsi/dx) at (x, t).
  std::pair<cplx, cplx> operator()(double x, double t) const {
    check_side(x);
    for (int lev = base_level;; ++lev) {
      const std::pair<cplx, cplx> fine = simpson(x, t, lev), coarse = simpson(x, t, lev - 1);
      const double res = std::max(std::abs(fine.first - coarse.first), std::abs(fine.second - coarse.second) * hb_ / amp_.p_hi) / 15;
      if (res <= 1e-8 * ref_) return fine;
      if (lev >= max_level)
        throw resolution_error("asymptotic_wave: Simpson doubling did not converge at t = " + std::to_string(t));
    }
  }

  double flux(double x, double t) const {
    const auto [psi, dpsi] = (*this)(x, t);
    return current_density(psi, dpsi, m_, hb_);
  }

 private:
  static constexpr int base_level = 10;
  static constexpr int max_level = 20;

  void check_side(double x) const {
    if (pot_.empty()) return;
    if (kind_ == WaveKind::T && x < pot_.support_hi()) throw domain_error("asymptotic_wave: transmitted wave needs x >= support end");
    if (kind_ != WaveKind::T && x > pot_.support_lo()) throw domain_error("asymptotic_wave: incident/reflected wave needs x <= support start");
  }

  std::vector<cplx> sample(const std::vector<double>& ps) const {
    std::vector<cplx> g(ps.size());
    for (std::size_t i = 0; i < ps.size(); ++i) {
      cplx f = amp_(ps[i]);
      if (kind_ != WaveKind::in && f != cplx(0)) {
        const auto a = amplitudes(pot_, ps[i]);
        f *= kind_ == WaveKind::T ? a.t : a.r_l;
      }
      g[i] = f;
    }
    return g;
  }

  void ensure_level(int lev) const {
    std::lock_guard lk(mu_);
    while (level_ < lev) {
      const std::size_t n = std::size_t{1} << (level_ + 1);
      const double h = (amp_.p_hi - amp_.p_lo) / static_cast<double>(n);
      std::vector<double> mids;
      for (std::size_t i = 1; i < n; i += 2) mids.push_back(amp_.p_lo + static_cast<double>(i) * h);
      const auto gm = sample(mids);
      std::vector<cplx> g(n + 1);
      for (std::size_t i = 0; i <= n; ++i) g[i] = (i % 2 == 0) ? g_[i / 2] : gm[i / 2];
      g_ = std::move(g);
      ++level_;
    }
  }

  std::pair<cplx, cplx> simpson(double x, double t, int lev) const {
    ensure_level(lev);
    std::lock_guard lk(mu_);
    const std::size_t n = std::size_t{1} << lev;
    const std::size_t stride = std::size_t{1} << (level_ - lev);
    const double h = (amp_.p_hi - amp_.p_lo) / static_cast<double>(n);
    const double sgn = kind_ == WaveKind::R ? -1.0 : 1.0;
    cplx s0 = 0, s1 = 0;
    for (std::size_t i = 0; i <= n; ++i) {
      const cplx gi = g_[i * stride];
      if (gi == cplx(0)) continue;
      const double p = amp_.p_lo + static_cast<double>(i) * h;
      const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      const cplx v = w * gi * std::polar(1.0, (sgn * p * x - p * p * t / (2 * m_)) / hb_);
      s0 += v;
      s1 += v * p;
    }
    const double c = h / 3 / std::sqrt(planck_h(hb_));
    return {s0 * c, s1 * c * cplx(0, sgn / hb_)};
  }

  WaveKind kind_;
  PiecewisePotential pot_;
  MomentumAmplitude amp_;
  double m_, hb_;
  double ref_ = 1;
  mutable std::mutex mu_;
  mutable int level_;
  mutable std::vector<cplx> g_;
};

inline cplx asymptotic_wave(WaveKind kind, const PiecewisePotential& pot, const GaussianPacketSpec& spec, double x, double t) {
  return AsymptoticWave(kind, pot, packet_momentum_amplitude(spec, pot))(x, t).first;
}

struct PassageRecord {
  double t_in_a = 0;
  double t_out_b = 0;
  double t_out_a = 0;
  double p_t = 0;
  double p_r = 0;
};

struct PassageResult {
  PassageRecord momentum;  // closed momentum-integral forms (the reported record)
  PassageRecord time;      // flux time integrals
  double res_t_in_a = 0, res_t_out_b = 0, res_t_out_a = 0;  // relative route differences
  double overlap_at_a = 0;  // interference shift of the flux moments at a
};

namespace detail {

// (int J dt, int t J dt) over the whole time line. Windows grow outward from [t0, t1]
// until a window carries less than 1e-8 of unit flux.
inline std::pair<double, double> flux_moments(const AsymptoticWave& w, double x, double t0, double t1) {
  auto f = [&](double t) {
    const double j = w.flux(x, t);
    return cplx(j, t * j);
  };
  auto chunk = [&](double lo, double hi) {
    const double span = hi - lo;
    const int n = 8;
    cplx s = 0;
    for (int i = 0; i < n; ++i) s += num::gauss32(f, lo + span * i / n, lo + span * (i + 1) / n);
    return s;
  };
  cplx total = chunk(t0, t1);
  double width = t1 - t0;
  double lo = t0, hi = t1;
  bool done_lo = false, done_hi = false;
  for (int it = 0; it < 60 && !(done_lo && done_hi); ++it) {
    if (!done_hi) {
      const cplx c = chunk(hi, hi + width);
      total += c;
      hi += width;
      done_hi = std::abs(c.real()) < 1e-8;
    }
    if (!done_lo) {
      const cplx c = chunk(lo - width, lo);
      total += c;
      lo -= width;
      done_lo = std::abs(c.real()) < 1e-8;
    }
    width *= 2;
  }
  if (!(done_lo && done_hi)) throw resolution_error("flux time integral: tail flux did not fall below 1e-8");
  return {total.real(), total.imag()};
}

// Time window where the flux of a packet with momenta in [p1, p2] passes after a free flight
// of length `path`, padded for spreading.
inline std::pair<double, double> passage_window(double path, double p1, double p2, double m, double pad) {
  const double ta = m * path / p2, tb = m * path / p1;
  return {std::min(ta, tb) - pad, std::max(ta, tb) + pad};
}

}  // namespace detail

/// Average passage instants at a (incident, reflected) and b (transmitted), by the flux
/// time integrals and by the closed momentum forms.
inline PassageResult passage_instants(const PiecewisePotential& pot, const MomentumAmplitude& amp, double a, double b) {
  if (!(a < b)) throw domain_error("passage_instants: need a < b");
  if (!pot.empty() && (a > pot.support_lo() || b < pot.support_hi()))
    throw domain_error("passage_instants: need a <= support start and b >= support end");
  const double m = pot.mass(), hb = pot.hbar();
  PassageResult res;

  // momentum route
  auto tr = [&](double p) { return amplitudes(pot, p); };
  struct Sample {
    double w, tt, rr, t_im, r_im, x0;
  };
  auto sample = [&](double p) {
    const double hstep = 1e-5 * p;
    const auto a0 = tr(p);
    auto tfn = [&](double q) { return tr(q).t; };
    auto rfn = [&](double q) { return tr(q).r_l; };
    const cplx dt = num::richardson_derivative(tfn, p, hstep);
    const cplx dr = num::richardson_derivative(rfn, p, hstep);
    return Sample{std::norm(amp(p)), std::norm(a0.t), std::norm(a0.r_l), std::imag(dt * std::conj(a0.t)),
                  std::imag(dr * std::conj(a0.r_l)), x0_functional(amp, p)};
  };
  auto integ = [&](auto&& f) { return num::adaptive(f, amp.p_lo, amp.p_hi, 1e-11, 15); };
  PassageRecord& mr = res.momentum;
  mr.p_t = integ([&](double p) { auto s = sample(p); return s.w * s.tt; });
  mr.p_r = integ([&](double p) { auto s = sample(p); return s.w * s.rr; });
  mr.t_in_a = integ([&](double p) { auto s = sample(p); return s.w * m / p * (a - s.x0); });
  if (mr.p_t > 1e-14)
    mr.t_out_b = integ([&](double p) { auto s = sample(p); return s.w * m / p * (s.tt * (b - s.x0) + hb * s.t_im); }) / mr.p_t;
  if (mr.p_r > 1e-14)
    mr.t_out_a = integ([&](double p) { auto s = sample(p); return s.w * m / p * (s.rr * (-a - s.x0) + hb * s.r_im); }) / mr.p_r;

  // time route
  const double pc = 0.5 * (amp.p_lo + amp.p_hi);
  const double x_c = amp.x_shift;
  const double len = pot.empty() ? 0.0 : pot.support_hi() - pot.support_lo();
  const double delta_est = 6 * std::sqrt(2.0) * hb / (amp.p_hi - amp.p_lo);  // p-width is about 12 sigma
  const double pad = m * (2 * len + 8 * delta_est) / pc;
  const double p1 = std::max(amp.p_lo, 0.25 * pc), p2 = amp.p_hi;
  const AsymptoticWave win(WaveKind::in, pot, amp), wt(WaveKind::T, pot, amp), wr(WaveKind::R, pot, amp);
  PassageRecord& tr_ = res.time;
  {
    const auto [w0, w1] = detail::passage_window(a - x_c, p1, p2, m, pad);
    const auto [n, mom] = detail::flux_moments(win, a, w0, w1);
    tr_.t_in_a = mom / n;
  }
  {
    const auto [w0, w1] = detail::passage_window(b - x_c, p1, p2, m, pad);
    const auto [n, mom] = detail::flux_moments(wt, b, w0, w1);
    tr_.p_t = n;
    tr_.t_out_b = n > 1e-14 ? mom / n : 0.0;
  }
  {
    const double path = std::abs(-a - x_c);
    const auto [w0, w1] = detail::passage_window(path, p1, p2, m, pad);
    const auto [n, mom] = detail::flux_moments(wr, a, w0, w1);
    tr_.p_r = -n;
    tr_.t_out_a = n < -1e-14 ? mom / n : 0.0;
  }

  const double tref = m * delta_est / pc;

  // Interference guard at a: shift of the flux moments at a caused by the cross term
  // between incident and reflected waves, relative to their separation in time.
  if (mr.p_r > 1e-10) {
    const auto [i0, i1] = detail::passage_window(a - x_c, p1, p2, m, pad);
    const auto [r0, r1] = detail::passage_window(std::abs(-a - x_c), p1, p2, m, pad);
    const double lo = std::min(i0, r0), hi = std::max(i1, r1);
    const int n = 8000;
    double s0 = 0, s1 = 0;
    for (int k = 0; k <= n; ++k) {
      const double t = lo + (hi - lo) * k / n;
      const auto [pi, di] = win(a, t);
      const auto [pr, dr] = wr(a, t);
      const double w = k == 0 || k == n ? 0.5 : 1.0;
      const double cross = w * hb / m * std::imag(std::conj(pi) * dr + std::conj(pr) * di);
      s0 += cross;
      s1 += cross * t;
    }
    const double dt = (hi - lo) / n;
    const double sep = std::max(std::abs(tr_.t_out_a - tr_.t_in_a), tref);
    res.overlap_at_a = std::max(std::abs(s0 * dt), std::abs(s1 * dt) / sep);
    if (res.overlap_at_a > 1e-3)
      throw resolution_error("passage_instants: incident and reflected packets interfere at a (moment shift " +
                             std::to_string(res.overlap_at_a) + "); move a further left");
  }

  auto rel = [&](double x, double y) { return std::abs(x - y) / std::max(std::abs(y), tref); };
  res.res_t_in_a = rel(tr_.t_in_a, mr.t_in_a);
  res.res_t_out_b = mr.p_t > 1e-10 ? rel(tr_.t_out_b, mr.t_out_b) : 0.0;
  res.res_t_out_a = mr.p_r > 1e-10 ? rel(tr_.t_out_a, mr.t_out_a) : 0.0;
  return res;
}

inline PassageResult passage_instants(const PiecewisePotential& pot, const GaussianPacketSpec& spec, double a, double b) {
  if (!pot.empty() && (a > pot.support_lo() - 5 * spec.delta || b < pot.support_hi() + 5 * spec.delta))
    throw domain_error("passage_instants: a and b must lie at least 5 delta outside the support");
  return passage_instants(pot, packet_momentum_amplitude(spec, pot), a, b);
}

inline double dwell_from(const PassageRecord& r) { return r.p_t * r.t_out_b - r.t_in_a + r.p_r * r.t_out_a; }

struct DualRoute {
  double momentum = 0;
  double time = 0;
  double residual = 0;  // |time - momentum| / max(|momentum|, reference time)
};

/// Wave-packet dwell time in [a, b] via P_T <t>_b^out - <t>_a^in + P_R <t>_a^out.
inline DualRoute wavepacket_dwell(const PiecewisePotential& pot, const GaussianPacketSpec& spec, double a, double b) {
  const auto r = passage_instants(pot, spec, a, b);
  DualRoute d{dwell_from(r.momentum), dwell_from(r.time), 0};
  d.residual = std::abs(d.time - d.momentum) / std::max(std::abs(d.momentum), pot.mass() * spec.delta / spec.p_c);
  return d;
}

/// Mean delay <Q> on [-b, b]: dwell with the potential minus free dwell (time route) against
/// the momentum average of the in-channel diagonal of the lifetime matrix.
inline DualRoute mean_delay_Q(const PiecewisePotential& pot, const GaussianPacketSpec& spec, double b = 0) {
  const double m = pot.mass(), hb = pot.hbar();
  if (b == 0) b = std::max(std::abs(pot.support_lo()), std::abs(pot.support_hi())) + 6 * spec.delta;
  const double a = -b;
  const auto amp = packet_momentum_amplitude(spec, pot);
  DualRoute d;
  if (pot.is_free()) return d;
  const auto r = passage_instants(pot, amp, a, b);
  // free dwell from the incident-wave flux at a and b
  const PiecewisePotential free_pot({}, m, hb);
  const AsymptoticWave wf(WaveKind::in, free_pot, amp);
  const double pc = spec.p_c;
  const double pad = 4 * m * spec.delta / pc;
  const double p1 = std::max(amp.p_lo, 0.25 * pc), p2 = amp.p_hi;
  const auto [w0, w1] = detail::passage_window(b - spec.x_c, p1, p2, m, pad);
  const auto [nb, mb] = detail::flux_moments(wf, b, w0, w1);
  const double free_dwell = mb / nb - r.time.t_in_a;
  d.time = dwell_from(r.time) - free_dwell;

  // column-diagonal Q_{++}(E) = |T|^2 dt_T + |R_l|^2 dt_Rl = hbar (m/p) Im(T' T* + R' R*) in p
  d.momentum = num::adaptive(
      [&](double p) {
        const auto q = delay_matrix(pot, p * p / (2 * m));
        const auto s = s_matrix(pot, p * p / (2 * m));
        double v = 0;
        if (q.defined[0][0]) v += std::norm(s[0][0]) * q.dt[0][0];
        if (q.defined[1][0]) v += std::norm(s[1][0]) * q.dt[1][0];
        return std::norm(amp(p)) * v;
      },
      amp.p_lo, amp.p_hi, 1e-11, 15);
  d.residual = std::abs(d.time - d.momentum) / std::max(std::abs(d.momentum), m * spec.delta / spec.p_c);
  return d;
}

/// psi(x, t) = h^{-1/2} int phi(p) exp(i(px - p^2 t/2m)/hbar) dp for free motion, with
/// Gauss-Legendre panels sized by the local phase rate. `span` is the phase advance per panel.
inline cplx free_wave(const MomentumAmplitude& amp, double x, double t, double mass, double span) {
  const double hb = amp.hbar;
  const double s = std::abs(t) / (mass * hb);
  cplx sum = 0;
  double p = amp.p_lo;
  const double maxw = (amp.p_hi - amp.p_lo) / 16;
  while (p < amp.p_hi) {
    const double r = std::abs(x - amp.x_shift - p * t / mass) / hb;
    double w = s > 0 ? (-r + std::sqrt(r * r + 4 * span * s)) / (2 * s) : span / std::max(r, 1e-300);
    w = std::min({w, maxw, amp.p_hi - p});
    sum += num::gauss10(
        [&](double q) { return amp.fn(q) * std::polar(1.0, (q * x - q * q * t / (2 * mass)) / hb); }, p, p + w);
    p += w;
  }
  return sum / std::sqrt(planck_h(hb));
}

struct SlopeCurve {
  std::vector<double> t;
  std::vector<double> density;  // |psi(x, t)|^2
  std::vector<double> slope;    // d ln density / d ln t
};

/// Local log-log slope of the free-motion density at x over a log-spaced time grid.
inline SlopeCurve free_decay_slope(const MomentumAmplitude& amp, double x, const std::vector<double>& tgrid, double mass = 1) {
  if (tgrid.size() < 3) throw domain_error("free_decay_slope: need at least 3 times");
  for (std::size_t i = 0; i < tgrid.size(); ++i) {
    if (!(tgrid[i] > 0)) throw domain_error("free_decay_slope: times must be positive");
    if (i && !(tgrid[i] > tgrid[i - 1])) throw domain_error("free_decay_slope: times must ascend");
  }
  if (tgrid.back() / tgrid.front() < 999.999) throw domain_error("free_decay_slope: time grid must span at least 3 decades");
  SlopeCurve c;
  c.t = tgrid;
  c.density = parallel_map<double>(tgrid.size(), [&](std::size_t i) {
    const cplx coarse = free_wave(amp, x, tgrid[i], mass, 1.0);
    const cplx fine = free_wave(amp, x, tgrid[i], mass, 0.5);
    const double scale = std::max(std::abs(fine), 1e-300);
    if (std::abs(fine - coarse) > 1e-7 * scale + 1e-12)
      throw resolution_error("free_decay_slope: momentum quadrature not converged at t = " + std::to_string(tgrid[i]));
    return std::norm(fine);
  });
  const std::size_t n = tgrid.size();
  c.slope.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i == 0 ? 0 : i - 1, hi = i + 1 == n ? n - 1 : i + 1;
    c.slope[i] = (std::log(c.density[hi]) - std::log(c.density[lo])) / (std::log(tgrid[hi]) - std::log(tgrid[lo]));
  }
  return c;
}

}  // namespace qtime1d
