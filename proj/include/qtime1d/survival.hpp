#pragma once

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qtime1d/errors.hpp"
#include "qtime1d/faddeeva.hpp"
#include "qtime1d/numerics.hpp"
#include "qtime1d/parallel.hpp"

namespace qtime1d {

struct Pole {
  cplx a;  // residue
  cplx q;  // position in momentum units
};

/// M(q) = sum_k a_k / (q - q_k), optionally plus an entire function.
struct PoleSet {
  std::vector<Pole> poles;
  double mass = 1;
  double hbar = 1;
  std::function<cplx(cplx)> entire;  // not serialised

  void validate() const {
    if (!(mass > 0) || !(hbar > 0)) throw domain_error("PoleSet: mass and hbar must be positive");
    for (std::size_t i = 0; i < poles.size(); ++i) {
      const cplx q = poles[i].q;
      if (!std::isfinite(q.real()) || !std::isfinite(q.imag()) || !std::isfinite(poles[i].a.real()) ||
          !std::isfinite(poles[i].a.imag()))
        throw parse_error("PoleSet: non-finite value at index " + std::to_string(i), static_cast<std::ptrdiff_t>(i));
      if (q == cplx(0)) throw parse_error("PoleSet: q = 0 at index " + std::to_string(i), static_cast<std::ptrdiff_t>(i));
      if (q.imag() > 0 && std::abs(q.real()) > 1e-12 * std::abs(q))
        throw parse_error("PoleSet: upper half-plane pole off the imaginary axis at index " + std::to_string(i),
                          static_cast<std::ptrdiff_t>(i));
      for (std::size_t j = 0; j < i; ++j)
        if (std::abs(poles[j].q - q) <= 1e-14 * std::abs(q))
          throw parse_error("PoleSet: repeated pole at index " + std::to_string(i), static_cast<std::ptrdiff_t>(i));
    }
  }

  cplx M(cplx q) const {
    cplx s = entire ? entire(q) : cplx(0);
    for (const auto& p : poles) s += p.a / (q - p.q);
    return s;
  }
};

/// {"poles": [[re_a, im_a, re_q, im_q], ...], "mass": m, "hbar": h}
inline PoleSet parse_poles(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("poles: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("poles") || !j["poles"].is_array()) throw parse_error("poles: missing \"poles\" array");
  PoleSet ps;
  std::ptrdiff_t i = 0;
  for (const auto& row : j["poles"]) {
    if (!row.is_array() || row.size() != 4)
      throw parse_error("poles: entry " + std::to_string(i) + " must be [re_a, im_a, re_q, im_q]", i);
    for (const auto& v : row)
      if (!v.is_number()) throw parse_error("poles: entry " + std::to_string(i) + " has a non-numeric value", i);
    ps.poles.push_back({{row[0].get<double>(), row[1].get<double>()}, {row[2].get<double>(), row[3].get<double>()}});
    ++i;
  }
  if (j.contains("mass")) ps.mass = j["mass"].get<double>();
  if (j.contains("hbar")) ps.hbar = j["hbar"].get<double>();
  ps.validate();
  return ps;
}

inline PoleSet load_poles(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open pole file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_poles(ss.str());
}

inline std::string to_json(const PoleSet& ps) {
  nlohmann::json j;
  j["poles"] = nlohmann::json::array();
  for (const auto& p : ps.poles) j["poles"].push_back({p.a.real(), p.a.imag(), p.q.real(), p.q.imag()});
  j["mass"] = ps.mass;
  j["hbar"] = ps.hbar;
  return j.dump();
}

/// f = (1 - i) sqrt(m hbar / t); u = q / f is real along the diagonal Im q = -Re q.
inline cplx diagonal_scale(double t, double m, double hbar) { return cplx(1, -1) * std::sqrt(m * hbar / t); }

inline std::vector<cplx> diagonal_variables(const PoleSet& ps, double t) {
  const cplx f = diagonal_scale(t, ps.mass, ps.hbar);
  std::vector<cplx> u;
  for (const auto& p : ps.poles) u.push_back(p.q / f);
  return u;
}

namespace detail {

// (i/2pi) int_D dq e^{-izt/hbar} E(q) for the entire addend, as a real-u integral.
inline cplx entire_term(const PoleSet& ps, double t) {
  if (!ps.entire) return 0;
  const cplx f = diagonal_scale(t, ps.mass, ps.hbar);
  auto g = [&](double u) { return std::exp(-u * u) * f * ps.entire(f * u); };
  const double re = num::adaptive([&](double u) { return g(u).real(); }, -9, 9, 1e-13);
  const double im = num::adaptive([&](double u) { return g(u).imag(); }, -9, 9, 1e-13);
  return cplx(0, 1) / (2 * pi) * cplx(re, im);
}

}  // namespace detail

/// A(t) = sum_k a_k w(-u_k) / 2.
inline cplx survival_w_sum(const PoleSet& ps, double t) {
  if (!(t > 0)) throw domain_error("survival: t must be positive");
  const auto u = diagonal_variables(ps, t);
  cplx s = 0;
  for (std::size_t k = 0; k < u.size(); ++k) s += 0.5 * ps.poles[k].a * w_eval(-u[k]);
  return s + detail::entire_term(ps, t);
}

struct SurvivalSplit {
  std::vector<cplx> e;  // exponential terms, nonzero for poles above the diagonal
  std::vector<cplx> d;  // w-function corrections
  cplx total() const {
    cplx s = 0;
    for (std::size_t k = 0; k < e.size(); ++k) s += e[k] + d[k];
    return s;
  }
};

/// E_k = a_k exp(-i q_k^2 t / 2 m hbar) for Im u_k > 0, with D_k = -a_k w(u_k) / 2; otherwise
/// E_k = 0 and D_k = a_k w(-u_k) / 2.
inline SurvivalSplit survival_split(const PoleSet& ps, double t) {
  if (!(t > 0)) throw domain_error("survival: t must be positive");
  const auto u = diagonal_variables(ps, t);
  SurvivalSplit sp;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const cplx a = ps.poles[k].a, q = ps.poles[k].q;
    if (u[k].imag() > 0) {
      sp.e.push_back(a * std::exp(cplx(0, -1) * q * q * t / (2 * ps.mass * ps.hbar)));
      sp.d.push_back(-0.5 * a * w_eval(u[k]));
    } else {
      sp.e.push_back(0);
      sp.d.push_back(0.5 * a * w_eval(-u[k]));
    }
  }
  return sp;
}

/// Contour form: (i/2pi) int_D dq e^{-izt/hbar} M(q), taken along the diagonal as a real-u
/// integral of e^{-u^2} f M(fu), plus residues of the poles swept when C is deformed onto D.
inline cplx survival_contour_quadrature(const PoleSet& ps, double t) {
  if (!(t > 0)) throw domain_error("survival: t must be positive");
  const auto u = diagonal_variables(ps, t);
  const double L = 9;
  std::vector<double> br{-L, L};
  for (std::size_t k = 0; k < u.size(); ++k) {
    if (std::abs(u[k].imag()) < 1e-8 * std::max(1.0, std::abs(u[k])))
      throw resolution_error("survival contour: pole " + std::to_string(k) +
                             " lies on the diagonal; shift the contour or perturb the pole");
    for (double s : {0.0, -1.0, 1.0, -4.0, 4.0, -16.0, 16.0}) {
      const double b = u[k].real() + s * std::abs(u[k].imag());
      if (b > -L && b < L) br.push_back(b);
    }
  }
  std::sort(br.begin(), br.end());
  auto g = [&](double x) {
    cplx s = 0;
    for (std::size_t k = 0; k < u.size(); ++k) s += ps.poles[k].a / (x - u[k]);
    return std::exp(-x * x) * s;
  };
  double scale = 0;
  for (const auto& p : ps.poles) scale += std::abs(p.a);
  const double tol = 1e-13 * scale / static_cast<double>(br.size());
  double re = 0, im = 0;
  for (std::size_t i = 0; i + 1 < br.size(); ++i) {
    if (!(br[i + 1] > br[i])) continue;
    re += num::adaptive_abs([&](double x) { return g(x).real(); }, br[i], br[i + 1], tol, 1e-13, 14);
    im += num::adaptive_abs([&](double x) { return g(x).imag(); }, br[i], br[i + 1], tol, 1e-13, 14);
  }
  cplx s = cplx(0, 1) / (2 * pi) * cplx(re, im);
  for (std::size_t k = 0; k < u.size(); ++k)
    if (u[k].imag() > 0) s += ps.poles[k].a * std::exp(-u[k] * u[k]);
  return s + detail::entire_term(ps, t);
}

/// Terms n = 0 .. n_terms-1 of A(t) = sum_n [sum_k a_k (-i u_k)^n / 2] / Gamma(n/2 + 1).
inline std::vector<cplx> short_time_terms(const PoleSet& ps, double t, int n_terms) {
  if (!(t > 0)) throw domain_error("survival: t must be positive");
  if (n_terms < 1) throw domain_error("short_time_series: n_terms must be >= 1");
  if (ps.entire) throw domain_error("short_time_series: entire addend not supported");
  const auto u = diagonal_variables(ps, t);
  if (n_terms >= 2) {
    double umax = 0;
    for (const auto& x : u) umax = std::max(umax, std::abs(x));
    const int n = n_terms - 1;
    const double ratio = umax * std::exp(std::lgamma((n - 1) / 2.0 + 1) - std::lgamma(n / 2.0 + 1));
    if (ratio >= 0.5)
      throw range_error("short_time_series: term ratio " + std::to_string(ratio) + " >= 0.5 at t = " + std::to_string(t));
  }
  std::vector<cplx> terms(n_terms, 0.0);
  for (std::size_t k = 0; k < u.size(); ++k) {
    cplx z = 1;
    for (int n = 0; n < n_terms; ++n) {
      terms[n] += 0.5 * ps.poles[k].a * z / std::tgamma(n / 2.0 + 1);
      z *= cplx(0, -1) * u[k];
    }
  }
  return terms;
}

inline cplx short_time_series(const PoleSet& ps, double t, int n_terms) {
  cplx s = 0;
  for (const auto& x : short_time_terms(ps, t, n_terms)) s += x;
  return s;
}

/// Coefficient a_1 of the long-time asymptote: -m sum_k a_k / q_k^3.
inline cplx long_time_coefficient(const PoleSet& ps) {
  cplx s = 0;
  for (const auto& p : ps.poles) s += p.a / (p.q * p.q * p.q);
  return -ps.mass * s;
}

/// M(0) = -sum_k a_k / q_k; when nonzero A(t) decays as t^{-1/2} instead.
inline cplx resolvent_at_zero(const PoleSet& ps) {
  cplx s = ps.entire ? ps.entire(0) : cplx(0);
  for (const auto& p : ps.poles) s -= p.a / p.q;
  return s;
}

/// A(t) ~ (1 - i)/(2 m sqrt(pi)) a_1 (m hbar / t)^{3/2}.
inline cplx long_time_asymptote(cplx a1, double m, double hbar, double t) {
  return cplx(1, -1) / (2 * m * sqrt_pi) * a1 * std::pow(m * hbar / t, 1.5);
}

struct SurvivalCurve {
  std::vector<double> t;
  std::vector<cplx> a_t;
  std::vector<double> s_t;
  std::vector<double> residual;  // |w-sum - contour| / |w-sum|
};

inline SurvivalCurve survival_curve(const PoleSet& ps, const std::vector<double>& tgrid) {
  ps.validate();
  SurvivalCurve c;
  c.t = tgrid;
  struct Row {
    cplx a;
    double res;
  };
  const auto rows = parallel_map<Row>(tgrid.size(), [&](std::size_t i) {
    const cplx a = survival_w_sum(ps, tgrid[i]);
    const cplx b = survival_contour_quadrature(ps, tgrid[i]);
    return Row{a, std::abs(a - b) / std::max(std::abs(a), 1e-300)};
  });
  for (const auto& r : rows) {
    c.a_t.push_back(r.a);
    c.s_t.push_back(std::norm(r.a));
    c.residual.push_back(r.res);
  }
  return c;
}

}  // namespace qtime1d
