#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "qtime1d/errors.hpp"
#include "qtime1d/numerics.hpp"
#include "qtime1d/potential.hpp"

namespace qtime1d {

struct PropagatorOptions {
  double absorber_width = 0;     // quadratic -iW ramps of this width inside both edges
  double absorber_strength = 0;  // W at the outer edge
  bool absorb_left = true;       // off when the left node is a source
  std::function<cplx(double)> left_value;  // Dirichlet value at the first node, 0 if empty
  std::size_t store_every = 0;   // 0 keeps only the first and last frames
  // called after every step with (step, t, psi)
  std::function<void(std::size_t, double, const std::vector<cplx>&)> observe;
};

struct Trajectory {
  std::vector<double> x;
  std::vector<double> t;
  std::vector<std::vector<cplx>> psi;

  double dx() const { return x[1] - x[0]; }

  /// Probability in [a, b] by the trapezoid rule over the nodes inside.
  static double probability(const std::vector<double>& x, const std::vector<cplx>& psi, double a, double b) {
    double s = 0;
    const double h = x[1] - x[0];
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
      const double lo = std::max(a, x[i]), hi = std::min(b, x[i + 1]);
      if (hi <= lo) continue;
      // linear interpolation of |psi|^2 inside the cell
      const double f0 = std::norm(psi[i]), f1 = std::norm(psi[i + 1]);
      auto f = [&](double y) { return f0 + (f1 - f0) * (y - x[i]) / h; };
      s += 0.5 * (f(lo) + f(hi)) * (hi - lo);
    }
    return s;
  }
  double probability(std::size_t frame, double a, double b) const { return probability(x, psi[frame], a, b); }

  /// dx psi^dagger M psi, the quantity a step conserves without absorbers.
  static double weighted_norm(const std::vector<cplx>& p, double dx) {
    double s = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      cplx mp = 10.0 / 12 * p[i];
      if (i) mp += p[i - 1] / 12.0;
      if (i + 1 < p.size()) mp += p[i + 1] / 12.0;
      s += std::real(std::conj(p[i]) * mp);
    }
    return s * dx;
  }
};

/// Crank-Nicolson on a uniform grid with a Numerov mass matrix M = (1, 10, 1)/12:
/// (M + i dt/2hbar K) psi' = (M - i dt/2hbar K) psi, K = -(hbar^2/2m) D2 + V_M, where V_M is the
/// symmetric tridiagonal (V_i + V_j)/24 off the diagonal and 10 V_i/12 on it. Both end nodes are
/// Dirichlet; the left one may carry a prescribed value.
inline Trajectory grid_propagate(const PiecewisePotential& pot, const std::vector<double>& x, std::vector<cplx> psi0,
                                 double dt, std::size_t steps, const PropagatorOptions& opt = {}) {
  const std::size_t n = x.size();
  if (n < 5 || psi0.size() != n) throw config_error("grid_propagate: need >= 5 nodes and a matching wavefunction");
  const double dx = (x.back() - x.front()) / static_cast<double>(n - 1);
  for (std::size_t i = 1; i < n; ++i)
    if (std::abs(x[i] - x[i - 1] - dx) > 1e-9 * dx) throw config_error("grid_propagate: grid must be uniform");
  if (!(dt > 0)) throw config_error("grid_propagate: dt must be positive");
  const double m = pot.mass(), hb = pot.hbar();
  if (dt * pot.max_abs_value() / hb > 0.1)
    throw config_error("grid_propagate: dt * max|V| / hbar = " + std::to_string(dt * pot.max_abs_value() / hb) + " exceeds 0.1");

  std::vector<cplx> v(n);
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = pot(x[i]);
    if (opt.absorber_width > 0) {
      const double dl = opt.absorb_left ? x.front() + opt.absorber_width - x[i] : 0.0, dr = x[i] - (x.back() - opt.absorber_width);
      const double d = std::max({dl, dr, 0.0}) / opt.absorber_width;
      v[i] -= cplx(0, opt.absorber_strength * d * d);
    }
  }
  const double c = hb * hb / (2 * m * dx * dx);
  const cplx it(0, dt / (2 * hb));
  // A = M + it K, B = M - it K; tridiagonal (lower = upper by symmetry)
  std::vector<cplx> ad(n), ao(n), bd(n), bo(n);  // ao[i], bo[i]: coupling of i and i+1
  for (std::size_t i = 0; i < n; ++i) {
    const cplx kd = 2 * c + 10.0 / 12 * v[i];
    ad[i] = 10.0 / 12 + it * kd;
    bd[i] = 10.0 / 12 - it * kd;
    if (i + 1 < n) {
      const cplx ko = -c + (v[i] + v[i + 1]) / 24.0;
      ao[i] = 1.0 / 12 + it * ko;
      bo[i] = 1.0 / 12 - it * ko;
    }
  }
  // Thomas factorisation of A restricted to the interior nodes 1..n-2
  std::vector<cplx> cp(n), den(n);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    den[i] = ad[i] - (i > 1 ? ao[i - 1] * cp[i - 1] : cplx(0));
    cp[i] = ao[i] / den[i];
  }

  auto boundary = [&](double t) { return opt.left_value ? opt.left_value(t) : cplx(0); };
  Trajectory tr;
  tr.x = x;
  psi0.front() = boundary(0);
  psi0.back() = 0;
  tr.t.push_back(0);
  tr.psi.push_back(psi0);
  std::vector<cplx> psi = std::move(psi0), rhs(n), y(n);
  for (std::size_t s = 1; s <= steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    for (std::size_t i = 1; i + 1 < n; ++i) rhs[i] = bo[i - 1] * psi[i - 1] + bd[i] * psi[i] + bo[i] * psi[i + 1];
    const cplx left = boundary(t);
    rhs[1] -= ao[0] * left;
    for (std::size_t i = 1; i + 1 < n; ++i) y[i] = (rhs[i] - (i > 1 ? ao[i - 1] * y[i - 1] : cplx(0))) / den[i];
    psi[n - 2] = y[n - 2];
    for (std::size_t i = n - 2; i-- > 1;) psi[i] = y[i] - cp[i] * psi[i + 1];
    psi.front() = left;
    psi.back() = 0;
    if (opt.observe) opt.observe(s, t, psi);
    if ((opt.store_every && s % opt.store_every == 0) || s == steps) {
      if (tr.t.back() != t) {
        tr.t.push_back(t);
        tr.psi.push_back(psi);
      }
    }
  }
  return tr;
}

}  // namespace qtime1d
