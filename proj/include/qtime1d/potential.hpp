#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qtime1d/errors.hpp"
#include "qtime1d/numerics.hpp"
#include "qtime1d/transfer.hpp"

namespace qtime1d {

struct Segment {
  double x_lo = 0, x_hi = 0, v = 0;
};

/// Finite-support, piecewise-constant potential. V = 0 outside the segments.
class PiecewisePotential {
 public:
  PiecewisePotential() = default;

  explicit PiecewisePotential(std::vector<Segment> segs, double mass = 1, double hbar = 1)
      : segs_(std::move(segs)), mass_(mass), hbar_(hbar) {
    if (!(std::isfinite(mass_) && mass_ > 0)) throw parse_error("mass must be positive and finite");
    if (!(std::isfinite(hbar_) && hbar_ > 0)) throw parse_error("hbar must be positive and finite");
    for (std::size_t i = 0; i < segs_.size(); ++i) {
      const auto& s = segs_[i];
      const auto idx = static_cast<std::ptrdiff_t>(i);
      if (!std::isfinite(s.x_lo) || !std::isfinite(s.x_hi) || !std::isfinite(s.v))
        throw parse_error("non-finite value in segment " + std::to_string(i), idx);
      if (!(s.x_lo < s.x_hi)) throw parse_error("empty or reversed segment at index " + std::to_string(i), idx);
      if (i > 0) {
        const double prev = segs_[i - 1].x_hi;
        const double tol = 1e-12 * std::max({1.0, std::abs(prev), std::abs(s.x_lo)});
        if (s.x_lo < prev - tol) throw parse_error("overlap at index " + std::to_string(i), idx);
        if (s.x_lo > prev + tol) throw parse_error("gap at index " + std::to_string(i), idx);
        segs_[i].x_lo = prev;
      }
    }
  }

  /// Single rectangular segment of height v0 on [x_lo, x_lo + width].
  static PiecewisePotential square(double v0, double width, double x_lo = 0, double mass = 1,
                                   double hbar = 1) {
    return PiecewisePotential({{x_lo, x_lo + width, v0}}, mass, hbar);
  }

  const std::vector<Segment>& segments() const { return segs_; }
  double mass() const { return mass_; }
  double hbar() const { return hbar_; }
  bool empty() const { return segs_.empty(); }

  bool is_free() const {
    return std::all_of(segs_.begin(), segs_.end(), [](const Segment& s) { return s.v == 0; });
  }

  /// Support endpoints a and b; both 0 for free motion.
  double support_lo() const { return segs_.empty() ? 0.0 : segs_.front().x_lo; }
  double support_hi() const { return segs_.empty() ? 0.0 : segs_.back().x_hi; }

  double operator()(double x) const {
    for (const auto& s : segs_)
      if (x >= s.x_lo && x < s.x_hi) return s.v;
    return 0;
  }

  double min_value() const {
    double m = 0;
    for (const auto& s : segs_) m = std::min(m, s.v);
    return m;
  }
  double max_abs_value() const {
    double m = 0;
    for (const auto& s : segs_) m = std::max(m, std::abs(s.v));
    return m;
  }

  /// Mirror symmetry about the support midpoint.
  bool is_symmetric(double tol = 1e-12) const {
    const std::size_t n = segs_.size();
    const double a = support_lo(), b = support_hi();
    const double scale = tol * std::max({1.0, std::abs(a), std::abs(b)});
    for (std::size_t i = 0; i < n; ++i) {
      const auto& s = segs_[i];
      const auto& r = segs_[n - 1 - i];
      if (std::abs((s.x_lo - a) - (b - r.x_hi)) > scale) return false;
      if (std::abs(s.v - r.v) > tol * std::max(1.0, std::abs(s.v))) return false;
    }
    return true;
  }

 private:
  std::vector<Segment> segs_;
  double mass_ = 1, hbar_ = 1;
};

/// Parse the JSON potential document {"segments": [[x_lo, x_hi, v], ...], "mass": m, "hbar": h}.
inline PiecewisePotential parse_potential(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("potential: invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("segments") || !j["segments"].is_array())
    throw parse_error("potential: missing \"segments\" array");
  std::vector<Segment> segs;
  std::ptrdiff_t i = 0;
  for (const auto& row : j["segments"]) {
    if (!row.is_array() || row.size() != 3 || !row[0].is_number() || !row[1].is_number() || !row[2].is_number())
      throw parse_error("potential: segment " + std::to_string(i) + " must be [x_lo, x_hi, v]", i);
    segs.push_back({row[0].get<double>(), row[1].get<double>(), row[2].get<double>()});
    ++i;
  }
  auto num = [&](const char* key) {
    if (!j.contains(key)) return 1.0;
    if (!j[key].is_number()) throw parse_error(std::string("potential: \"") + key + "\" must be a number");
    return j[key].get<double>();
  };
  return PiecewisePotential(std::move(segs), num("mass"), num("hbar"));
}

inline PiecewisePotential load_potential(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw parse_error("cannot open potential file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_potential(ss.str());
}

inline std::string to_json(const PiecewisePotential& pot) {
  nlohmann::json j;
  j["segments"] = nlohmann::json::array();
  for (const auto& s : pot.segments()) j["segments"].push_back({s.x_lo, s.x_hi, s.v});
  j["mass"] = pot.mass();
  j["hbar"] = pot.hbar();
  return j.dump();
}

struct BoundStateCount {
  int n_b = 0;
  std::vector<double> energies;
};

/// Bound-state matching function at E < 0: decaying solution started on the right,
/// propagated to the left edge, compared with the decaying left solution. Only the sign
/// and zeros are meaningful.
inline double bound_state_mismatch(const PiecewisePotential& pot, double e) {
  const double m = pot.mass(), hb = pot.hbar();
  const double q = std::sqrt(std::max(0.0, -2 * m * e)) / hb;
  ScaledState<double> st{1.0, -q, 0.0};
  const auto& segs = pot.segments();
  for (auto it = segs.rbegin(); it != segs.rend(); ++it)
    st.step(local_q2(e, it->v, m, hb), it->x_lo - it->x_hi);
  return q * st.psi - st.dpsi;
}

inline BoundStateCount count_bound_states(const PiecewisePotential& pot) {
  BoundStateCount out;
  const double vmin = pot.min_value();
  if (pot.empty() || vmin >= 0) return out;
  const double m = pot.mass(), hb = pot.hbar();
  double strength = 0;
  for (const auto& s : pot.segments())
    if (s.v < 0) strength += std::sqrt(-2 * m * s.v) * (s.x_hi - s.x_lo) / hb;
  const auto n = static_cast<std::size_t>(
      std::max(200.0, std::ceil(10.0 * static_cast<double>(pot.segments().size()) * (1 + strength))));
  // uniform in sqrt(E - vmin): roughly uniform in the interior oscillation phase
  const double umax = std::sqrt(-vmin);
  std::vector<double> es(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = umax * static_cast<double>(i) / static_cast<double>(n);
    es[i] = vmin + u * u;
  }
  es.front() = vmin * (1 - 1e-15);
  es.back() = 0;
  auto f = [&](double e) { return bound_state_mismatch(pot, e); };
  double fprev = f(es[0]);
  for (std::size_t i = 1; i <= n; ++i) {
    const double fi = f(es[i]);
    if (fi == 0 && i < n) {
      out.energies.push_back(es[i]);
    } else if ((fprev < 0) != (fi < 0) && fprev != 0) {
      const double tol = 1e-12 * std::max(1.0, std::abs(vmin));
      const double root = num::bisect(f, es[i - 1], es[i], tol);
      if (root < 0) out.energies.push_back(root);
    }
    fprev = fi;
  }
  out.n_b = static_cast<int>(out.energies.size());
  return out;
}

}  // namespace qtime1d
