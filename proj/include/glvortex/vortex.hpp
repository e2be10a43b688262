#ifndef GLVORTEX_VORTEX_HPP
#define GLVORTEX_VORTEX_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glvortex/dynamics.hpp"
#include "glvortex/energy.hpp"
#include "glvortex/errors.hpp"
#include "glvortex/weighted_energy.hpp"

namespace glv {

struct VortexPoint {
  Point position{0.0, 0.0, 0.0};
  int degree = 1;
};

/// Closed polyline on the torus. Vertices are wrapped into the box; consecutive vertices are
/// joined by their shortest periodic displacement.
struct Filament {
  std::vector<Point> vertices;
  int degree = 1;                  // relative to the stored orientation
  std::array<int, 3> wraps{0, 0, 0};  // net number of turns around each torus axis

  /// Vertices lifted to R^N so that consecutive points differ by the periodic displacement.
  std::vector<Point> unwrapped(const TorusGeometry& g) const {
    std::vector<Point> out;
    if (vertices.empty()) return out;
    out.push_back(vertices.front());
    for (std::size_t i = 1; i < vertices.size(); ++i) {
      const Point d = g.displacement(vertices[i - 1], vertices[i]);
      out.push_back({out.back()[0] + d[0], out.back()[1] + d[1], out.back()[2] + d[2]});
    }
    return out;
  }

  double length(const TorusGeometry& g) const {
    double s = 0.0;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      const Point d = g.displacement(vertices[(i + 1) % vertices.size()], vertices[i]);
      s += std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    }
    return s;
  }
};

struct VortexSet {
  double time = 0.0;
  double core_radius_hint = 0.0;
  int dim = 2;
  std::vector<VortexPoint> points;   // N = 2
  std::vector<Filament> filaments;   // N = 3

  bool empty() const { return points.empty() && filaments.empty(); }
  int total_degree() const {
    int s = 0;
    for (const auto& p : points) s += p.degree;
    return s;
  }

  nlohmann::json to_json() const {
    nlohmann::json j{{"time", time}, {"core_radius_hint", core_radius_hint}, {"dim", dim}};
    j["points"] = nlohmann::json::array();
    for (const auto& p : points) j["points"].push_back({{"position", p.position}, {"degree", p.degree}});
    j["filaments"] = nlohmann::json::array();
    for (const auto& f : filaments) {
      nlohmann::json v = nlohmann::json::array();
      for (const auto& x : f.vertices) v.push_back(x);
      j["filaments"].push_back({{"degree", f.degree}, {"wraps", f.wraps}, {"vertices", v}});
    }
    return j;
  }
};

namespace detail {

// Phase increment along an edge, antisymmetric under reversal even at exactly pi, so
// that the windings of the faces of a cell always balance.
inline double edge_angle(cplx from, cplx to) {
  const bool ordered = from.real() < to.real() || (from.real() == to.real() && from.imag() < to.imag());
  return ordered ? std::arg(to * std::conj(from)) : -std::arg(from * std::conj(to));
}

/// Winding of the phase around the loop c0 -> c1 -> c2 -> c3 -> c0.
inline int loop_winding(const std::array<cplx, 4>& c) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) s += edge_angle(c[i], c[(i + 1) % 4]);
  return int(std::lround(s / (2.0 * M_PI)));
}

/// Zero of the bilinear interpolant on the unit square with corners c00, c10, c11, c01,
/// returned as (s, t) in [0,1]^2. Falls back to the modulus-weighted centre if Newton fails.
inline std::array<double, 2> bilinear_zero(const std::array<cplx, 4>& c) {
  const cplx c00 = c[0], c10 = c[1], c11 = c[2], c01 = c[3];
  auto f = [&](double s, double t) {
    return (1 - s) * (1 - t) * c00 + s * (1 - t) * c10 + s * t * c11 + (1 - s) * t * c01;
  };
  double s = 0.5, t = 0.5;
  for (int it = 0; it < 30; ++it) {
    const cplx v = f(s, t);
    const cplx fs = (1 - t) * (c10 - c00) + t * (c11 - c01);
    const cplx ft = (1 - s) * (c01 - c00) + s * (c11 - c10);
    const double det = fs.real() * ft.imag() - fs.imag() * ft.real();
    if (std::abs(det) < 1e-300) break;
    const double ds = (v.real() * ft.imag() - v.imag() * ft.real()) / det;
    const double dt = (fs.real() * v.imag() - fs.imag() * v.real()) / det;
    s -= ds;
    t -= dt;
    if (std::abs(ds) + std::abs(dt) < 1e-13) break;
  }
  if (std::isfinite(s) && std::isfinite(t) && s >= -1e-9 && s <= 1 + 1e-9 && t >= -1e-9 && t <= 1 + 1e-9)
    return {std::clamp(s, 0.0, 1.0), std::clamp(t, 0.0, 1.0)};
  const std::array<std::array<double, 2>, 4> pos{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
  double ws = 0.0, sx = 0.0, sy = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double w = 1.0 / (std::abs(c[i]) + 1e-12);
    ws += w;
    sx += w * pos[i][0];
    sy += w * pos[i][1];
  }
  return {sx / ws, sy / ws};
}

inline std::size_t shift(const TorusGeometry& g, std::size_t node, int axis, long by) {
  auto ijk = g.unravel(node);
  const long n = long(g.size(axis));
  ijk[axis] = std::size_t(((long(ijk[axis]) + by) % n + n) % n);
  return g.index(ijk[0], ijk[1], ijk[2]);
}

}  // namespace detail

/// Zero set of u: vortex points (N = 2) or closed oriented filaments (N = 3), located
/// through the winding of the phase around grid plaquettes.
inline VortexSet extract_vortex_set(const ComplexField& field) {
  const TorusGeometry& g = field.geom;
  // nodes sitting exactly on the zero set get a fixed phase so every edge angle is defined
  auto u = field.values;
  for (auto& v : u)
    if (std::abs(v) < 1e-150) v = cplx(1e-150, 0.0);
  VortexSet vs;
  vs.time = field.time;
  vs.core_radius_hint = field.epsilon;
  vs.dim = g.dim();
  if (g.dim() == 2) {
    for (std::size_t m = 0; m < g.node_count(); ++m) {
      const std::size_t m1 = detail::shift(g, m, 0, 1), m2 = detail::shift(g, m1, 1, 1), m3 = detail::shift(g, m, 1, 1);
      const std::array<cplx, 4> c{u[m], u[m1], u[m2], u[m3]};
      const int w = detail::loop_winding(c);
      if (w == 0) continue;
      const auto st = detail::bilinear_zero(c);
      const Point x = g.node_position(m);
      const Point p = g.wrap({x[0] + st[0] * g.spacing(0), x[1] + st[1] * g.spacing(1), 0.0});
      vs.points.push_back({p, w});
    }
    return vs;
  }

  // face (a, node): plaquette normal to axis a spanned by b = a+1, c = a+2 (mod 3)
  const std::size_t count = g.node_count();
  std::vector<int> flux(3 * count, 0);
  std::vector<Point> crossing(3 * count);
  for (int a = 0; a < 3; ++a) {
    const int b = (a + 1) % 3, c = (a + 2) % 3;
    for (std::size_t m = 0; m < count; ++m) {
      const std::size_t mb = detail::shift(g, m, b, 1), mbc = detail::shift(g, mb, c, 1), mc = detail::shift(g, m, c, 1);
      const std::array<cplx, 4> cs{u[m], u[mb], u[mbc], u[mc]};
      const int w = detail::loop_winding(cs);
      if (w == 0) continue;
      flux[3 * m + a] = w;
      const auto st = detail::bilinear_zero(cs);
      Point x = g.node_position(m);
      x[b] += st[0] * g.spacing(b);
      x[c] += st[1] * g.spacing(c);
      crossing[3 * m + a] = g.wrap(x);
    }
  }
  // remaining traversals per face; a flux w crosses |w| times in direction sign(w)
  std::vector<int> remaining(flux.size());
  for (std::size_t f = 0; f < flux.size(); ++f) remaining[f] = std::abs(flux[f]);

  // cube the filament enters after crossing face f in its flux direction
  auto target_cube = [&](std::size_t f) {
    const std::size_t m = f / 3;
    const int a = int(f % 3);
    return flux[f] > 0 ? m : detail::shift(g, m, a, -1);
  };
  // faces of cube q through which flux leaves
  auto exits = [&](std::size_t q, std::size_t entry) {
    std::vector<std::size_t> out;
    for (int a = 0; a < 3; ++a) {
      const std::size_t front = 3 * detail::shift(g, q, a, 1) + std::size_t(a);
      const std::size_t back = 3 * q + std::size_t(a);
      if (flux[front] > 0 && front != entry) out.push_back(front);
      if (flux[back] < 0 && back != entry) out.push_back(back);
    }
    return out;
  };

  for (std::size_t start = 0; start < flux.size(); ++start) {
    while (remaining[start] > 0) {
      Filament fil;
      std::size_t f = start;
      for (std::size_t guard = 0;; ++guard) {
        if (guard > flux.size()) throw ExtractionError("vortex chain does not close");
        --remaining[f];
        fil.vertices.push_back(crossing[f]);
        const std::size_t q = target_cube(f);
        const auto out = exits(q, f);
        if (std::find(out.begin(), out.end(), start) != out.end()) break;
        auto it = std::find_if(out.begin(), out.end(), [&](std::size_t e) { return remaining[e] > 0; });
        if (it == out.end()) {
          const auto ijk = g.unravel(q);
          throw ExtractionError("open vortex chain at cell (" + std::to_string(ijk[0]) + "," +
                                std::to_string(ijk[1]) + "," + std::to_string(ijk[2]) + ")");
        }
        f = *it;
      }

      // orientation: +1 along the flux; flip to a canonical direction
      const auto up = fil.unwrapped(g);
      Point net{0.0, 0.0, 0.0};
      {
        const Point close = g.displacement(fil.vertices.back(), fil.vertices.front());
        for (int a = 0; a < 3; ++a) net[a] = up.back()[a] + close[a] - up.front()[a];
      }
      Point area{0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < up.size(); ++i) {
        const Point& p = up[i];
        const Point& q = up[(i + 1) % up.size()];
        area[0] += 0.5 * (p[1] * q[2] - p[2] * q[1]);
        area[1] += 0.5 * (p[2] * q[0] - p[0] * q[2]);
        area[2] += 0.5 * (p[0] * q[1] - p[1] * q[0]);
      }
      for (int a = 0; a < 3; ++a) fil.wraps[a] = int(std::lround(net[a] / g.length(a)));
      const bool wraps = fil.wraps != std::array<int, 3>{0, 0, 0};
      const Point& ref = wraps ? net : area;
      int big = 0;
      for (int a = 1; a < 3; ++a)
        if (std::abs(ref[a]) > std::abs(ref[big])) big = a;
      fil.degree = 1;
      if (ref[big] < 0.0) {
        std::reverse(fil.vertices.begin(), fil.vertices.end());
        for (int& w : fil.wraps) w = -w;
        fil.degree = -1;
      }
      vs.filaments.push_back(std::move(fil));
    }
  }
  return vs;
}

// ---------------------------------------------------------------- densities

struct DensitySample {
  Point x{0.0, 0.0, 0.0};
  double time = 0.0;
  std::vector<double> radii;
  std::vector<double> theta;            // mu(B_r) / (omega_{N-2} r^{N-2})
  std::vector<double> theta_parabolic;  // Gaussian-weighted analogue
  double theta_lower = 0.0;
  double theta_upper = 0.0;

  nlohmann::json to_json() const {
    return {{"x", x},           {"time", time},           {"radii", radii}, {"theta", theta},
            {"theta_parabolic", theta_parabolic}, {"theta_lower", theta_lower}, {"theta_upper", theta_upper}};
  }
};

inline DensitySample density_scan(const EnergyLedger& ledger, const Point& x, std::span<const double> radii,
                                  const CapFunction& cap = default_cap()) {
  const TorusGeometry& g = ledger.geom;
  const int n = g.dim();
  const double h = g.max_spacing();
  for (double r : radii)
    if (!(r > h && r < g.inj())) throw RangeError("density radii must lie in (h, inj)");
  const double log_eps = log_scale(ledger.epsilon);
  const double omega = unit_ball_volume(n - 2);
  DensitySample d;
  d.x = x;
  d.time = ledger.time;
  std::vector<double> dist(g.node_count()), dp(g.node_count());
  for (std::size_t m = 0; m < g.node_count(); ++m) {
    dist[m] = torus_distance(g, g.node_position(m), x);
    dp[m] = d_plus_from_distance(g, cap, dist[m]);
  }
  for (double r : radii) {
    std::vector<std::size_t> mask;
    double gauss = 0.0;
    for (std::size_t m = 0; m < g.node_count(); ++m) {
      if (dist[m] < r) mask.push_back(m);
      gauss += ledger.density[m] * std::exp(-dp[m] * dp[m] / (4.0 * r * r));
    }
    const double rn = std::pow(r, n - 2);
    d.radii.push_back(r);
    d.theta.push_back(measure_of_set(ledger, mask) / (omega * rn));
    d.theta_parabolic.push_back(gauss * g.cell_volume() / log_eps / (std::pow(4.0 * M_PI, 0.5 * n) * rn));
  }
  if (!d.theta.empty()) {
    d.theta_lower = *std::min_element(d.theta.begin(), d.theta.end());
    d.theta_upper = *std::max_element(d.theta.begin(), d.theta.end());
  }
  return d;
}

/// Shape of the upper density bound with empirical constants:
/// (M0 / omega_{N-2}) e^{1/4} (e^{c2 t} t^{(2-N)/2} + (4 pi)^{N/2} c1 sqrt(t)).
inline double density_upper_bound(int dim, double m0, double t, double c1, double c2) {
  return m0 / unit_ball_volume(dim - 2) * std::exp(0.25) *
         (std::exp(c2 * t) * std::pow(t, 0.5 * (2 - dim)) + std::pow(4.0 * M_PI, 0.5 * dim) * c1 * std::sqrt(t));
}

/// u at an arbitrary point by multilinear interpolation of the grid values.
inline cplx sample_field(const ComplexField& f, const Point& x) {
  const TorusGeometry& g = f.geom;
  std::array<std::size_t, 3> i0{0, 0, 0};
  std::array<double, 3> w{0.0, 0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) {
    const double s = g.wrap(x)[a] / g.spacing(a);
    const double fl = std::floor(s);
    i0[a] = std::size_t(fl) % g.size(a);
    w[a] = s - fl;
  }
  cplx v(0.0, 0.0);
  const int corners = 1 << g.dim();
  for (int c = 0; c < corners; ++c) {
    std::array<std::size_t, 3> ijk{0, 0, 0};
    double weight = 1.0;
    for (int a = 0; a < g.dim(); ++a) {
      const int bit = (c >> a) & 1;
      ijk[a] = (i0[a] + std::size_t(bit)) % g.size(a);
      weight *= bit ? w[a] : 1.0 - w[a];
    }
    v += weight * f.values[g.index(ijk[0], ijk[1], ijk[2])];
  }
  return v;
}

// ---------------------------------------------------------------- clearing out

struct Probe {
  Point x{0.0, 0.0, 0.0};
  bool on_structure = false;
};

/// Eight probes derived from the planted data: half on the structures, half far from them.
inline std::vector<Probe> default_probes(const TorusGeometry& g, const InitialData& spec) {
  std::vector<Probe> p;
  const double L0 = g.length(0), L1 = g.length(1), L2 = g.dim() == 3 ? g.length(2) : 0.0;
  if (const auto* l = std::get_if<VortexLines>(&spec)) {
    const int a = (l->axis == 0) ? 1 : 0, b = (l->axis == 2) ? 1 : 2;
    for (int i = 0; i < 4; ++i) {
      const auto& v = l->lines[std::size_t(i) % l->lines.size()];
      Point x{0.0, 0.0, 0.0};
      x[a] = v.position[0];
      x[b] = v.position[1];
      x[l->axis] = (0.125 + 0.25 * i) * g.length(l->axis);
      p.push_back({x, true});
    }
    // far probes: midway between lines along the cross-section
    for (int i = 0; i < 4; ++i) {
      Point x{0.0, 0.0, 0.0};
      const auto& v0 = l->lines.front().position;
      x[a] = v0[0] + 0.25 * g.length(a);
      x[b] = v0[1] + 0.25 * g.length(b) * (i % 2 ? 1.0 : -1.0);
      x[l->axis] = (0.25 * i) * g.length(l->axis);
      p.push_back({g.wrap(x), false});
    }
  } else if (const auto* r = std::get_if<VortexRing>(&spec)) {
    const int ax = r->axis, a = (ax + 1) % 3, b = (ax + 2) % 3;
    for (int i = 0; i < 4; ++i) {
      Point x = r->center;
      x[a] += r->radius * std::cos(0.5 * M_PI * i);
      x[b] += r->radius * std::sin(0.5 * M_PI * i);
      p.push_back({g.wrap(x), true});
    }
    for (int i = 0; i < 4; ++i) {
      Point x = r->center;
      x[ax] += 0.5 * g.length(ax);
      x[a] += 0.25 * g.length(a) * (i % 2 ? 1.0 : -1.0);
      x[b] += 0.25 * g.length(b) * (i / 2 ? 1.0 : -1.0);
      p.push_back({g.wrap(x), false});
    }
  } else {
    for (int i = 0; i < 8; ++i) {
      Point x{(0.1 + 0.37 * i) * L0, (0.3 + 0.61 * i) * L1, (0.7 + 0.23 * i) * L2};
      p.push_back({g.wrap(x), false});
    }
  }
  return p;
}

struct ClearingOutSample {
  double epsilon = 0.0;
  std::size_t probe = 0;
  bool on_structure = false;
  double radius = 0.0;
  double weighted = 0.0;  // weighted energy / |log eps|
  double defect = 0.0;    // 1 - |u(x_T, T)|
};

struct ClearingOutReport {
  std::vector<ClearingOutSample> samples;
  std::vector<double> sigmas;
  std::vector<double> eta_hat;  // per sigma; +inf when no sample violates the bound

  /// Largest weighted energy below which every sample clears to 1 - sigma.
  static double eta_for(const std::vector<ClearingOutSample>& s, double sigma) {
    double eta = std::numeric_limits<double>::infinity();
    for (const auto& x : s)
      if (x.defect > sigma) eta = std::min(eta, x.weighted);
    return eta;
  }

  void write_csv(std::ostream& os) const {
    os << "epsilon,probe,on_structure,R,weighted_energy_normalized,modulus_defect\n";
    os.precision(12);
    for (const auto& x : samples)
      os << x.epsilon << ',' << x.probe << ',' << (x.on_structure ? 1 : 0) << ',' << x.radius << ',' << x.weighted
         << ',' << x.defect << '\n';
  }

  nlohmann::json summary() const {
    nlohmann::json eta = nlohmann::json::array();
    for (std::size_t i = 0; i < sigmas.size(); ++i)
      eta.push_back({{"sigma", sigmas[i]},
                     {"eta_hat", std::isfinite(eta_hat[i]) ? nlohmann::json(eta_hat[i]) : nlohmann::json("inf")}});
    return {{"samples", samples.size()}, {"eta", eta}};
  }
};

struct ClearingOutConfig {
  int dim = 3;
  std::array<double, 3> lengths{1.0, 1.0, 1.0};
  std::size_t grid = 64;
  InitialData spec = PhaseWave{};
  std::vector<double> ladder{0.1, 0.05, 0.025};
  std::vector<double> sigmas{0.1, 0.25, 0.5};
  double t_end = 0.01;
  double dt_factor = 0.2;
  std::vector<double> radius_factors{4.0, 8.0};  // R = factor * eps, kept below sqrt(T)
  std::vector<Probe> probes;                     // empty: default_probes
  bool allow_underresolved = false;
};

/// Weighted energy at (x, T) for R = factor * eps (kept below sqrt(T)) and the modulus
/// defect at each probe, for one finished trajectory.
inline std::vector<ClearingOutSample> clearing_out_samples(const Trajectory& traj, const std::vector<Probe>& probes,
                                                           const std::vector<double>& radius_factors) {
  std::vector<ClearingOutSample> out;
  const ComplexField& last = traj.back();
  const double eps = last.epsilon, T = last.time;
  const double log_eps = log_scale(eps);
  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    const double defect = 1.0 - std::abs(sample_field(last, probes[pi].x));
    for (double f : radius_factors) {
      const double R = f * eps;
      if (R * R > T - traj.t_begin() + 1e-12 * std::max(1.0, T)) continue;
      ClearingOutSample s;
      s.epsilon = eps;
      s.probe = pi;
      s.on_structure = probes[pi].on_structure;
      s.radius = R;
      s.weighted = weighted_energy(traj, {probes[pi].x, T}, R) / log_eps;
      s.defect = defect;
      out.push_back(s);
    }
  }
  return out;
}

inline void check_clearing_out_ladder(const std::vector<double>& ladder, const std::vector<double>& sigmas) {
  for (double s : sigmas)
    if (!(s > 0.0 && s < 1.0)) throw InputError("sigma must lie in (0, 1)");
  for (std::size_t i = 1; i < ladder.size(); ++i)
    if (!(ladder[i] < ladder[i - 1])) throw InputError("epsilon ladder must be strictly decreasing");
}

inline ClearingOutReport clearing_out_experiment(const ClearingOutConfig& cfg) {
  check_clearing_out_ladder(cfg.ladder, cfg.sigmas);
  const std::array<std::size_t, 3> sizes{cfg.grid, cfg.grid, cfg.dim == 3 ? cfg.grid : 1};
  const TorusGeometry g(cfg.dim, cfg.lengths, sizes);
  const std::vector<Probe> probes = cfg.probes.empty() ? default_probes(g, cfg.spec) : cfg.probes;
  ClearingOutReport rep;
  rep.sigmas = cfg.sigmas;
  for (double eps : cfg.ladder) {
    IntegratorConfig ic;
    ic.t_end = cfg.t_end;
    ic.dt_factor = cfg.dt_factor;
    ic.snapshot_stride = 1;
    const Trajectory traj = evolve(make_initial(g, eps, cfg.spec, {cfg.allow_underresolved}), ic);
    const auto s = clearing_out_samples(traj, probes, cfg.radius_factors);
    rep.samples.insert(rep.samples.end(), s.begin(), s.end());
  }
  for (double s : cfg.sigmas) rep.eta_hat.push_back(ClearingOutReport::eta_for(rep.samples, s));
  return rep;
}

}  // namespace glv

#endif  // GLVORTEX_VORTEX_HPP
