#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "qtime1d/qtime1d.hpp"

namespace {

using namespace qtime1d;
using json = nlohmann::ordered_json;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

std::string num17(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Output {
  std::string path;
  std::string format;  // csv | json | "" (from the extension, csv otherwise)

  bool as_json() const {
    if (!format.empty()) return format == "json";
    return std::filesystem::path(path).extension() == ".json";
  }

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw config_error("cannot write output file " + path);
    f << text;
    if (!f) throw config_error("write failed for " + path);
  }

  void emit(const Table& t) const {
    std::ostringstream s;
    if (as_json()) {
      json j;
      j["columns"] = t.columns;
      j["rows"] = json::array();
      for (const auto& r : t.rows) j["rows"].push_back(r);
      s << j.dump(1) << '\n';
    } else {
      for (std::size_t i = 0; i < t.columns.size(); ++i) s << (i ? "," : "") << t.columns[i];
      s << '\n';
      for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i) s << (i ? "," : "") << num17(r[i]);
        s << '\n';
      }
    }
    write(s.str());
  }

  // objects: JSON as is, CSV as one header row of dotted keys and one value row
  void emit(const json& obj) const {
    if (format.empty() || as_json()) {
      write(obj.dump(1) + "\n");
      return;
    }
    std::vector<std::string> keys, vals;
    auto flat = [&](auto&& self, const json& j, const std::string& pre) -> void {
      for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string k = pre.empty() ? it.key() : pre + "." + it.key();
        if (it->is_object()) {
          self(self, *it, k);
        } else {
          keys.push_back(k);
          vals.push_back(it->is_number() ? num17(it->get<double>()) : it->is_null() ? "nan" : it->dump());
        }
      }
    };
    flat(flat, obj, "");
    std::ostringstream s;
    for (std::size_t i = 0; i < keys.size(); ++i) s << (i ? "," : "") << keys[i];
    s << '\n';
    for (std::size_t i = 0; i < vals.size(); ++i) s << (i ? "," : "") << vals[i];
    s << '\n';
    write(s.str());
  }
};

void add_output(CLI::App* sub, Output& out) {
  sub->add_option("--out", out.path, "output file (stdout if omitted)");
  sub->add_option("--format", out.format, "csv or json (default: from the --out extension)")
      ->check(CLI::IsMember({"csv", "json"}));
}

std::vector<double> momentum_grid(double lo, double hi, std::size_t n) {
  if (!(lo > 0 && hi > lo)) throw domain_error("need 0 < pmin < pmax");
  if (n < 2) throw domain_error("need n >= 2");
  return num::linspace(lo, hi, n);
}

std::vector<double> time_grid(double lo, double hi, std::size_t n, bool log) {
  if (!(hi > lo)) throw domain_error("need tmin < tmax");
  if (n < 2) throw domain_error("need n >= 2");
  if (log) {
    if (!(lo > 0)) throw domain_error("logarithmic time grid needs tmin > 0");
    return num::logspace(lo, hi, n);
  }
  return num::linspace(lo, hi, n);
}

// values of a continuous phase curve at the original grid nodes (refinement adds nodes)
std::vector<double> phase_at_nodes(const PhaseCurve& c, const std::vector<double>& ps) {
  std::vector<double> out;
  std::size_t j = 0;
  for (double p : ps) {
    while (j < c.momenta.size() && c.momenta[j] != p) ++j;
    if (j == c.momenta.size()) throw resolution_error("phase curve lost a grid node");
    out.push_back(c.phi[j]);
  }
  return out;
}

// ---- amplitudes
struct AmplitudeArgs {
  std::string potential;
  double pmin = 0, pmax = 0;
  std::size_t n = 200;
  Output out;
};

void run_amplitudes(const AmplitudeArgs& a) {
  const auto pot = load_potential(a.potential);
  const auto ps = momentum_grid(a.pmin, a.pmax, a.n);
  const auto phi = phase_at_nodes(phase_curve(pot, ps, PhaseKind::T), ps);
  const auto amps = parallel_map<ScatteringAmplitudes>(ps.size(), [&](std::size_t i) { return amplitudes(pot, ps[i]); });
  Table t{{"p", "ReT", "ImT", "absT2", "phi_T", "ReR_l", "ImR_l", "ReR_r", "ImR_r"}, {}};
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& s = amps[i];
    t.rows.push_back({ps[i], s.t.real(), s.t.imag(), std::norm(s.t), phi[i], s.r_l.real(), s.r_l.imag(), s.r_r.real(), s.r_r.imag()});
  }
  a.out.emit(t);
}

// ---- times
struct TimesArgs {
  std::string potential, quantity;
  double pmin = 0, pmax = 0;
  std::size_t n = 200;
  std::optional<double> a, b, x0;
  Output out;
};

void run_times(const TimesArgs& o) {
  const auto pot = load_potential(o.potential);
  const auto ps = momentum_grid(o.pmin, o.pmax, o.n);
  const double m = pot.mass();
  const double a = o.a.value_or(pot.support_lo()), b = o.b.value_or(pot.support_hi());
  Table t;
  if (o.quantity == "dwell") {
    if (!(b > a)) throw domain_error("dwell: need a < b (give --a and --b for free motion)");
    const auto v = parallel_map<double>(ps.size(), [&](std::size_t i) { return dwell_time_stationary(pot, a, b, ps[i]); });
    t.columns = {"p", "dwell"};
    for (std::size_t i = 0; i < ps.size(); ++i) t.rows.push_back({ps[i], v[i]});
  } else if (o.quantity == "phase") {
    // two extra nodes on each side so the 5-point derivative reaches the ends
    const double h = ps.size() > 1 ? ps[1] - ps[0] : 0;
    if (!(ps.front() - 2 * h > 0)) throw domain_error("phase: pmin must exceed two grid steps");
    const auto ext = num::linspace(ps.front() - 2 * h, ps.back() + 2 * h, ps.size() + 4);
    const auto ct = phase_curve(pot, ext, PhaseKind::T);
    const bool refl = !pot.is_free();
    const PhaseCurve cr = refl ? phase_curve(pot, ext, PhaseKind::R_l) : PhaseCurve{};
    const double x0 = o.x0.value_or(a), d = pot.support_hi() - pot.support_lo();
    t.columns = {"p", "phi_T", "dphi_T_dp", "t_phase_T", "t_phase_R", "t_extrapolated"};
    const auto phi = phase_at_nodes(ct, std::vector<double>(ext.begin() + 2, ext.end() - 2));
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const double p = ext[i + 2];
      t.rows.push_back({p, phi[i], ct.derivative(p), phase_time_T(x0, b, p, ct),
                        refl ? phase_time_R(x0, a, p, cr) : std::nan(""), extrapolated_phase_time(d, p, ct)});
    }
  } else if (o.quantity == "delay") {
    const auto v = parallel_map<DelayMatrix>(ps.size(), [&](std::size_t i) { return delay_matrix(pot, ps[i] * ps[i] / (2 * m)); });
    t.columns = {"E", "p", "dt_00", "dt_01", "dt_10", "dt_11"};
    for (std::size_t i = 0; i < ps.size(); ++i)
      t.rows.push_back({v[i].e, ps[i], v[i].dt[0][0], v[i].dt[0][1], v[i].dt[1][0], v[i].dt[1][1]});
  } else if (o.quantity == "qmatrix") {
    const auto v = parallel_map<QMatrix>(ps.size(), [&](std::size_t i) { return q_matrix(pot, ps[i] * ps[i] / (2 * m)); });
    t.columns = {"E", "p", "Q00", "ReQ01", "ImQ01", "Q11", "trace_over_h"};
    for (std::size_t i = 0; i < ps.size(); ++i) {
      const auto& q = v[i].q;
      t.rows.push_back({v[i].e, ps[i], q[0][0].real(), q[0][1].real(), q[0][1].imag(), q[1][1].real(),
                        (q[0][0].real() + q[1][1].real()) / planck_h(pot.hbar())});
    }
  } else if (o.quantity == "bounds") {
    if (pot.empty()) throw domain_error("bounds: potential has no support");
    const double d = pot.support_hi() - pot.support_lo(), half = d / 2;
    const bool sym = pot.is_symmetric();
    struct Row {
      double dt, sharp;
    };
    const auto v = parallel_map<Row>(ps.size(), [&](std::size_t i) {
      const double p = ps[i];
      Row r{delay_matrix(pot, p * p / (2 * m)).dt[0][0], std::nan("")};
      if (sym) {
        const auto [d0, d1] = eigenphases(pot, p);
        r.sharp = sharp_delay_bound(p, half, d0, d1, m, pot.hbar());
      }
      return r;
    });
    t.columns = {"p", "dt_pp", "naive", "rigorous", "sharp"};
    for (std::size_t i = 0; i < ps.size(); ++i)
      t.rows.push_back({ps[i], v[i].dt, negative_delay_bound(ps[i], d, BoundVariant::naive, m, pot.hbar()),
                        negative_delay_bound(ps[i], half, BoundVariant::rigorous, m, pot.hbar()), v[i].sharp});
  }
  o.out.emit(t);
}

// ---- packet, packet-times
struct PacketArgs {
  std::string potential;
  double xc = 0, pc = 0, delta = 0, a = 0, b = 0;
  double tmin = 0, tmax = 0;
  std::size_t n = 200;
  Output out;
};

void run_packet(const PacketArgs& o) {
  const auto pot = load_potential(o.potential);
  const GaussianPacketSpec spec{o.xc, o.pc, o.delta};
  validate(spec, pot);
  if (!(o.a <= pot.support_lo() && o.b >= pot.support_hi() && o.a < o.b))
    throw domain_error("packet: need a <= support start, b >= support end, a < b");
  const auto ts = time_grid(o.tmin, o.tmax, o.n, false);
  const auto amp = packet_momentum_amplitude(spec, pot);
  const AsymptoticWave win(WaveKind::in, pot, amp), wr(WaveKind::R, pot, amp), wt(WaveKind::T, pot, amp);
  const double m = pot.mass(), hb = pot.hbar();
  auto ja = [&](double t) {
    const auto [p1, d1] = win(o.a, t);
    const auto [p2, d2] = wr(o.a, t);
    return current_density(p1 + p2, d1 + d2, m, hb);
  };
  auto jb = [&](double t) { return wt.flux(o.b, t); };
  // P_ab(t) = int_{-inf}^t (J_a - J_b) by continuity; the lower end steps back from t = 0
  // until the incident flux at a is gone
  const double hmax = 0.25 * m * spec.delta / spec.p_c;
  double t_start = std::min(0.0, ts.front());
  for (int k = 0;; ++k) {
    double jmax = 0;
    for (int j = 0; j <= 8; ++j) jmax = std::max(jmax, std::abs(ja(t_start - j * hmax)));
    if (jmax < 1e-12) break;
    if (k > 1000) throw resolution_error("packet: incident flux at a does not die out at early times");
    t_start -= 8 * hmax;
  }
  std::vector<double> edges{t_start};
  for (double t : ts)
    if (t > edges.back()) edges.push_back(t);
  const auto inc = parallel_map<double>(edges.size() - 1, [&](std::size_t i) {
    const double lo = edges[i], hi = edges[i + 1];
    const auto k = static_cast<std::size_t>(std::ceil((hi - lo) / hmax));
    double s = 0;
    for (std::size_t j = 0; j < k; ++j) {
      const double u = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(k);
      const double v = lo + (hi - lo) * static_cast<double>(j + 1) / static_cast<double>(k);
      s += num::gauss32([&](double t) { return ja(t) - jb(t); }, u, v);
    }
    return s;
  });
  std::vector<double> cum{0};
  for (double v : inc) cum.push_back(cum.back() + v);
  const auto flux = parallel_map<std::pair<double, double>>(ts.size(), [&](std::size_t i) {
    return std::pair{ja(ts[i]), jb(ts[i])};
  });
  Table t{{"t", "J_a", "J_b", "P_ab"}, {}};
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto it = std::lower_bound(edges.begin(), edges.end(), ts[i]);
    t.rows.push_back({ts[i], flux[i].first, flux[i].second, cum[static_cast<std::size_t>(it - edges.begin())]});
  }
  o.out.emit(t);
}

json record_json(const PassageRecord& r) {
  return {{"t_in_a", r.t_in_a}, {"t_out_b", r.t_out_b}, {"t_out_a", r.t_out_a}, {"P_T", r.p_t}, {"P_R", r.p_r}};
}

json dual_json(const DualRoute& d) { return {{"momentum", d.momentum}, {"time", d.time}, {"residual", d.residual}}; }

void run_packet_times(const PacketArgs& o) {
  const auto pot = load_potential(o.potential);
  const GaussianPacketSpec spec{o.xc, o.pc, o.delta};
  const auto r = passage_instants(pot, spec, o.a, o.b);
  DualRoute dw{dwell_from(r.momentum), dwell_from(r.time), 0};
  dw.residual = std::abs(dw.time - dw.momentum) / std::max(std::abs(dw.momentum), pot.mass() * spec.delta / spec.p_c);
  json j;
  j["momentum"] = record_json(r.momentum);
  j["time"] = record_json(r.time);
  j["residuals"] = {{"t_in_a", r.res_t_in_a}, {"t_out_b", r.res_t_out_b}, {"t_out_a", r.res_t_out_a}};
  j["interference_at_a"] = r.overlap_at_a;
  j["dwell"] = dual_json(dw);
  j["mean_delay_Q"] = dual_json(mean_delay_Q(pot, spec));
  o.out.emit(j);
}

// ---- decay-slope
struct DecayArgs {
  std::string amp = "gauss";
  double x0 = -10, p0 = 1, delta = 1, alpha = 0.5, x = 0, mass = 1, hbar = 1;
  double tmin = 10, tmax = 1e4;
  std::size_t n = 61;
  Output out;
};

MomentumAmplitude decay_amplitude(const DecayArgs& o) {
  if (o.amp == "gauss") return gaussian_amplitude(o.x0, o.p0, o.delta, o.hbar);
  return suppressed_amplitude(o.x0, o.p0, o.delta, o.alpha, o.hbar);
}

void run_decay(const DecayArgs& o) {
  const auto c = free_decay_slope(decay_amplitude(o), o.x, time_grid(o.tmin, o.tmax, o.n, true), o.mass);
  Table t{{"t", "density", "slope"}, {}};
  for (std::size_t i = 0; i < c.t.size(); ++i) t.rows.push_back({c.t[i], c.density[i], c.slope[i]});
  o.out.emit(t);
}

// ---- survival
struct SurvivalArgs {
  std::string poles;
  double tmin = 0, tmax = 0;
  std::size_t n = 100;
  bool linear = false;
  Output out;
};

void run_survival(const SurvivalArgs& o) {
  const auto ps = load_poles(o.poles);
  const auto c = survival_curve(ps, time_grid(o.tmin, o.tmax, o.n, !o.linear));
  Table t{{"t", "ReA", "ImA", "S", "residual"}, {}};
  for (std::size_t i = 0; i < c.t.size(); ++i) t.rows.push_back({c.t[i], c.a_t[i].real(), c.a_t[i].imag(), c.s_t[i], c.residual[i]});
  o.out.emit(t);
}

// ---- source, source-scales
struct SourceArgs {
  std::optional<double> omega0, energy, v0;
  double x = 0, mass = 1;
  double tmin = 0, tmax = 0;
  std::size_t n = 200;
  std::string units = "dimensionless";
  Output out;

  bool au() const { return units == "au"; }
  // scale factors from atomic units (hbar = 1) to the dimensionless form
  double time_scale() const { return au() ? *v0 : 1.0; }
  double length_scale() const { return au() ? std::sqrt(2 * mass * *v0) : 1.0; }

  SourceSpec spec() const {
    if (au()) {
      if (!energy || !v0) throw config_error("--units au needs --energy and --v0");
      if (!(*v0 > 0) || !(mass > 0)) throw domain_error("source: --v0 and --mass must be positive");
      return {*energy / *v0, x * length_scale()};
    }
    if (!omega0) throw config_error("source: --omega0 is required (or --units au with --energy/--v0)");
    return {*omega0, x};
  }
};

void run_source(const SourceArgs& o) {
  const auto s = o.spec();
  const double ts_ = o.time_scale();
  auto tg = time_grid(o.tmin, o.tmax, o.n, false);
  if (!(tg.front() > 0)) throw domain_error("source: tmin must be positive");
  for (auto& t : tg) t *= ts_;
  const auto c = source_curve(s, tg);
  Table t{{"t", "Re_psi", "Im_psi", "abs_psi2", "abs_saddle2", "abs_residue2", "R"}, {}};
  for (std::size_t i = 0; i < tg.size(); ++i)
    t.rows.push_back({tg[i] / ts_, c.psi[i].real(), c.psi[i].imag(), std::norm(c.psi[i]), std::norm(c.saddle[i]),
                      std::norm(c.residue[i]), c.ratio[i]});
  o.out.emit(t);
}

void run_source_scales(const SourceArgs& o) {
  const auto s = o.spec();
  const auto sc = transient_scales(s);
  const auto root = crossover_time(s);
  const double ts_ = o.time_scale(), ls = o.length_scale();
  json j;
  j["units"] = o.units;
  j["omega0"] = s.omega0;
  j["kappa0"] = sc.kappa0 * ls;
  j["tau"] = sc.tau / ts_;
  j["t_f"] = sc.t_f / ts_;
  j["t_tr"] = sc.t_tr / ts_;
  j["t_crossover"] = root ? json(*root / ts_) : json(nullptr);
  j["ratio_at_tau"] = sc.ratio_at_tau;
  j["tau_much_less_than_t_tr"] = sc.valid;
  j["omega_s_at_t_f"] = sc.omega_s(sc.t_f) * (o.au() ? *o.v0 : 1.0);
  o.out.emit(j);
}

// ---- faddeeva-selftest
void run_selftest(const Output& out) {
  const auto r = w_identity_residuals();
  json j{{"reflection", r.reflection}, {"conjugation", r.conjugation}, {"region_switch", r.region_switch}, {"points", r.points}};
  out.emit(j);
}

// ---- reproduce
void write_file(const std::filesystem::path& p, const Table& t) {
  Output o{p.string(), "csv"};
  o.emit(t);
}

void reproduce_fig1(const std::filesystem::path& dir) {
  const auto ps = num::linspace(0.01, 6, 600);
  Table t{{"p", "phi_T_d1", "phi_T_d2", "phi_T_d3"}, {}};
  std::vector<std::vector<double>> cols;
  for (double d : {1.0, 2.0, 3.0}) {
    const auto pot = PiecewisePotential::square(5, d);
    cols.push_back(phase_at_nodes(phase_curve(pot, ps, PhaseKind::T), ps));
  }
  for (std::size_t i = 0; i < ps.size(); ++i) t.rows.push_back({ps[i], cols[0][i], cols[1][i], cols[2][i]});
  write_file(dir / "fig1.csv", t);
}

void reproduce_fig2(const std::filesystem::path& dir) {
  const auto ts = num::logspace(1, 1e4, 121);
  const auto g = free_decay_slope(gaussian_amplitude(-10, 1, 1), 0, ts);
  const auto s = free_decay_slope(suppressed_amplitude(-10, 1, 1, 0.5), 0, ts);
  Table t{{"t", "density_gauss", "slope_gauss", "density_suppressed", "slope_suppressed"}, {}};
  for (std::size_t i = 0; i < ts.size(); ++i) t.rows.push_back({ts[i], g.density[i], g.slope[i], s.density[i], s.slope[i]});
  write_file(dir / "fig2.csv", t);
}

std::string one_line(std::string s) {
  for (auto& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qtime1d: characteristic times of one-dimensional collisions"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0: QTIME1D_THREADS or hardware)")->check(CLI::NonNegativeNumber);

  AmplitudeArgs amp;
  auto* c_amp = app.add_subcommand("amplitudes", "T, R_l, R_r and the continuous phase of T over a momentum grid");
  c_amp->add_option("--potential", amp.potential, "potential JSON file")->required();
  c_amp->add_option("--pmin", amp.pmin)->required();
  c_amp->add_option("--pmax", amp.pmax)->required();
  c_amp->add_option("--n", amp.n);
  add_output(c_amp, amp.out);

  TimesArgs tim;
  auto* c_tim = app.add_subcommand("times", "stationary dwell, phase and delay times, lifetime matrix, delay bounds");
  c_tim->add_option("--potential", tim.potential)->required();
  c_tim->add_option("--quantity", tim.quantity)->required()->check(CLI::IsMember({"dwell", "phase", "delay", "qmatrix", "bounds"}));
  c_tim->add_option("--pmin", tim.pmin)->required();
  c_tim->add_option("--pmax", tim.pmax)->required();
  c_tim->add_option("--n", tim.n);
  c_tim->add_option("--a", tim.a, "region start (default: support start)");
  c_tim->add_option("--b", tim.b, "region end (default: support end)");
  c_tim->add_option("--x0", tim.x0, "phase-time reference point (default: a)");
  add_output(c_tim, tim.out);

  PacketArgs pk;
  auto* c_pk = app.add_subcommand("packet", "fluxes at a and b and the probability between them");
  auto* c_pt = app.add_subcommand("packet-times", "passage instants, dwell and mean delay by both routes (JSON)");
  for (auto* c : {c_pk, c_pt}) {
    c->add_option("--potential", pk.potential)->required();
    c->add_option("--xc", pk.xc)->required();
    c->add_option("--pc", pk.pc)->required();
    c->add_option("--delta", pk.delta)->required();
    c->add_option("--a", pk.a)->required();
    c->add_option("--b", pk.b)->required();
    add_output(c, pk.out);
  }
  c_pk->add_option("--tmin", pk.tmin);
  c_pk->add_option("--tmax", pk.tmax)->required();
  c_pk->add_option("--n", pk.n);

  DecayArgs dec;
  auto* c_dec = app.add_subcommand("decay-slope", "free-motion density and its log-log slope at a point");
  c_dec->add_option("--amp", dec.amp)->check(CLI::IsMember({"gauss", "suppressed"}));
  c_dec->add_option("--x0", dec.x0);
  c_dec->add_option("--p0", dec.p0);
  c_dec->add_option("--delta", dec.delta);
  c_dec->add_option("--alpha", dec.alpha);
  c_dec->add_option("--x", dec.x);
  c_dec->add_option("--mass", dec.mass);
  c_dec->add_option("--tmin", dec.tmin);
  c_dec->add_option("--tmax", dec.tmax);
  c_dec->add_option("--n", dec.n);
  add_output(c_dec, dec.out);

  SurvivalArgs sv;
  auto* c_sv = app.add_subcommand("survival", "survival amplitude from a pole expansion");
  c_sv->add_option("--poles", sv.poles, "pole-set JSON file")->required();
  c_sv->add_option("--tmin", sv.tmin)->required();
  c_sv->add_option("--tmax", sv.tmax)->required();
  c_sv->add_option("--n", sv.n);
  c_sv->add_flag("--linear", sv.linear, "linear time grid (default logarithmic)");
  add_output(c_sv, sv.out);

  SourceArgs src;
  auto* c_src = app.add_subcommand("source", "field of a sharp-onset source in an evanescent medium");
  auto* c_sc = app.add_subcommand("source-scales", "traversal time, forerunner peak and transient duration (JSON)");
  for (auto* c : {c_src, c_sc}) {
    c->add_option("--omega0", src.omega0, "frequency in units of the step height");
    c->add_option("--x", src.x)->required();
    c->add_option("--units", src.units)->check(CLI::IsMember({"dimensionless", "au"}));
    c->add_option("--energy", src.energy, "source energy (au)");
    c->add_option("--v0", src.v0, "step height (au)");
    c->add_option("--mass", src.mass, "mass (au)");
    add_output(c, src.out);
  }
  c_src->add_option("--tmin", src.tmin)->required();
  c_src->add_option("--tmax", src.tmax)->required();
  c_src->add_option("--n", src.n);

  Output self_out;
  auto* c_self = app.add_subcommand("faddeeva-selftest", "max identity residuals of w(z) (JSON)");
  add_output(c_self, self_out);

  std::string fig, out_dir = "out";
  auto* c_rep = app.add_subcommand("reproduce", "write the figure data sets");
  c_rep->add_option("figure", fig)->required()->check(CLI::IsMember({"fig1", "fig2"}));
  c_rep->add_option("--out-dir", out_dir);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "qtime1d: " << one_line(e.what()) << "\n" << app.help();
    return 2;
  }

  try {
    set_thread_count(threads);
    (void)thread_count();  // reject a bad QTIME1D_THREADS up front
    if (*c_amp) run_amplitudes(amp);
    else if (*c_tim) run_times(tim);
    else if (*c_pk) run_packet(pk);
    else if (*c_pt) run_packet_times(pk);
    else if (*c_dec) run_decay(dec);
    else if (*c_sv) run_survival(sv);
    else if (*c_src) run_source(src);
    else if (*c_sc) run_source_scales(src);
    else if (*c_self) run_selftest(self_out);
    else if (*c_rep) {
      std::filesystem::create_directories(out_dir);
      if (fig == "fig1") reproduce_fig1(out_dir);
      else reproduce_fig2(out_dir);
    }
  } catch (const domain_error& e) {
    std::cerr << "qtime1d: domain error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const parse_error& e) {
    std::cerr << "qtime1d: parse error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const config_error& e) {
    std::cerr << "qtime1d: config error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const resolution_error& e) {
    std::cerr << "qtime1d: resolution error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const range_error& e) {
    std::cerr << "qtime1d: range error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "qtime1d: config error: " << one_line(e.what()) << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "qtime1d: internal error: " << one_line(e.what()) << "\n";
    return 1;
  }
  return 0;
}
