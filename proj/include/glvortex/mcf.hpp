#ifndef GLVORTEX_MCF_HPP
#define GLVORTEX_MCF_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "glvortex/energy.hpp"
#include "glvortex/errors.hpp"
#include "glvortex/field.hpp"
#include "glvortex/spectral.hpp"
#include "glvortex/trajectory.hpp"
#include "glvortex/vortex.hpp"

namespace glv {

// ---------------------------------------------------------------- stress tensor

/// Per-node T = e I - grad u (x) du, stored row-major as N*N grids.
struct StressField {
  TorusGeometry geom;
  std::vector<RealGrid> components;
  double time = 0.0;

  const RealGrid& at(int i, int j) const { return components[std::size_t(i * geom.dim() + j)]; }

  RealGrid trace() const {
    RealGrid t(geom.node_count(), 0.0);
    for (int i = 0; i < geom.dim(); ++i)
      for (std::size_t n = 0; n < t.size(); ++n) t[n] += at(i, i)[n];
    return t;
  }

  double asymmetry() const {
    double m = 0.0;
    for (int i = 0; i < geom.dim(); ++i)
      for (int j = i + 1; j < geom.dim(); ++j)
        for (std::size_t n = 0; n < geom.node_count(); ++n) m = std::max(m, std::abs(at(i, j)[n] - at(j, i)[n]));
    return m;
  }
};

inline StressField stress_field(const ComplexField& field, const std::vector<ComplexGrid>& grad) {
  const int N = field.geom.dim();
  const auto led = energy_from_gradient(field, grad);
  StressField s;
  s.geom = field.geom;
  s.time = field.time;
  s.components.assign(std::size_t(N * N), RealGrid(field.geom.node_count(), 0.0));
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) {
      auto& c = s.components[std::size_t(i * N + j)];
      for (std::size_t n = 0; n < c.size(); ++n) c[n] = (i == j ? led.density[n] : 0.0) - dot(grad[i][n], grad[j][n]);
    }
  return s;
}

inline StressField stress_field(const ComplexField& field) { return stress_field(field, spectral_gradient(field)); }

/// sigma = -(u_t . grad u)/|log eps| with u_t from the PDE.
inline OneForm mixed_derivative(const ComplexField& field, const std::vector<ComplexGrid>& grad) {
  const ComplexGrid ut = pde_rhs(field);
  const double L = log_scale(field.epsilon);
  OneForm s(field.geom, field.time);
  for (int a = 0; a < field.geom.dim(); ++a)
    for (std::size_t n = 0; n < ut.size(); ++n) s.components[a][n] = -dot(ut[n], grad[a][n]) / L;
  return s;
}

/// omega = |u_t|^2/|log eps| with u_t from the PDE.
inline RealGrid time_derivative_density(const ComplexField& field) {
  const ComplexGrid ut = pde_rhs(field);
  const double L = log_scale(field.epsilon);
  RealGrid w(ut.size());
  for (std::size_t n = 0; n < w.size(); ++n) w[n] = std::norm(ut[n]) / L;
  return w;
}

struct StressIdentityReport {
  double time = 0.0;
  double lhs = 0.0;  // (1/|log eps|) int T : DX
  double rhs = 0.0;  // -int <X, sigma>
  double rel_err = 0.0;
  double asymmetry = 0.0;

  nlohmann::json to_json() const {
    return {{"time", time}, {"lhs", lhs}, {"rhs", rhs}, {"rel_err", rel_err}, {"asymmetry", asymmetry}};
  }
};

inline StressIdentityReport stress_identity_check(const ComplexField& field, const std::vector<RealGrid>& X) {
  const TorusGeometry& g = field.geom;
  const int N = g.dim();
  if (int(X.size()) != N) throw InputError("vector field needs one component per axis");
  for (const auto& c : X)
    if (c.size() != g.node_count()) throw InputError("vector field grid does not match torus grid");
  const auto grad = spectral_gradient(field);
  const StressField T = stress_field(field, grad);
  const OneForm sigma = mixed_derivative(field, grad);
  const double L = log_scale(field.epsilon);

  StressIdentityReport r;
  r.time = field.time;
  r.asymmetry = T.asymmetry();
  RealGrid contraction(g.node_count(), 0.0), pairing(g.node_count(), 0.0);
  for (int j = 0; j < N; ++j) {
    const auto dXj = real_gradient(g, X[j]);
    for (int i = 0; i < N; ++i)
      for (std::size_t n = 0; n < contraction.size(); ++n) contraction[n] += T.at(i, j)[n] * dXj[i][n];
    for (std::size_t n = 0; n < pairing.size(); ++n) pairing[n] += X[j][n] * sigma.components[j][n];
  }
  r.lhs = integrate(g, contraction) / L;
  r.rhs = -integrate(g, pairing);
  const double den = std::max(std::abs(r.lhs), std::abs(r.rhs));
  r.rel_err = den > 0.0 ? std::abs(r.lhs - r.rhs) / den : 0.0;
  return r;
}

/// max |tr T - (N-2) e - 2 V| over the nodes.
inline double trace_identity_check(const ComplexField& field) {
  const auto grad = spectral_gradient(field);
  const auto led = energy_from_gradient(field, grad);
  const RealGrid tr = stress_field(field, grad).trace();
  const int N = field.geom.dim();
  double m = 0.0;
  for (std::size_t n = 0; n < tr.size(); ++n)
    m = std::max(m, std::abs(tr[n] - (N - 2) * led.density[n] - 2.0 * led.potential[n]));
  return m;
}

// ---------------------------------------------------------------- filament geometry

/// Filament resampled at near-uniform arclength with circumscribed-circle curvature
/// vectors and tangents at every sample.
struct FilamentGeometry {
  std::vector<Point> points;  // unwrapped
  std::vector<Point> curvature;
  std::vector<Point> tangent;
  double length = 0.0;
  bool closed_loop = true;  // false for filaments wrapping the torus
};

namespace detail {

inline Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Point add(const Point& a, const Point& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Point scale(const Point& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }
inline double dot3(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Point cross3(const Point& a, const Point& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm3(const Point& a) { return std::sqrt(dot3(a, a)); }

/// Curvature vector at b of the circle through a, b, c (zero for collinear points).
inline Point circumscribed_curvature(const Point& a, const Point& b, const Point& c) {
  const Point p = sub(a, b), q = sub(c, b);
  const Point n = cross3(p, q);
  const double n2 = dot3(n, n);
  if (n2 < 1e-30 * dot3(p, p) * dot3(q, q)) return {0.0, 0.0, 0.0};
  const Point o = scale(cross3(sub(scale(q, dot3(p, p)), scale(p, dot3(q, q))), n), 0.5 / n2);
  return scale(o, 1.0 / dot3(o, o));
}

}  // namespace detail

inline FilamentGeometry filament_geometry(const TorusGeometry& g, const Filament& f, double spacing) {
  FilamentGeometry out;
  auto up = f.unwrapped(g);
  if (up.size() < 3) throw ExtractionError("filament too short for curvature");
  // close the loop in the lifted picture; wrapping filaments end one period away
  const Point close = g.displacement(f.vertices.back(), f.vertices.front());
  up.push_back(detail::add(up.back(), close));
  out.closed_loop = f.wraps == std::array<int, 3>{0, 0, 0};
  std::vector<double> s{0.0};
  for (std::size_t i = 1; i < up.size(); ++i) s.push_back(s.back() + detail::norm3(detail::sub(up[i], up[i - 1])));
  out.length = s.back();
  const std::size_t n = std::max<std::size_t>(8, std::size_t(std::lround(out.length / spacing)));
  const double ds = out.length / double(n);
  std::size_t seg = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double sk = ds * double(k);
    while (seg + 2 < s.size() && s[seg + 1] < sk) ++seg;
    const double w = (sk - s[seg]) / std::max(s[seg + 1] - s[seg], 1e-300);
    out.points.push_back(detail::add(detail::scale(up[seg], 1.0 - w), detail::scale(up[seg + 1], w)));
  }
  // the period vector maps the end of the lift back to its start
  const Point period = detail::sub(up.back(), up.front());
  for (std::size_t k = 0; k < n; ++k) {
    const Point prev = k == 0 ? detail::sub(out.points[n - 1], period) : out.points[k - 1];
    const Point next = k + 1 == n ? detail::add(out.points[0], period) : out.points[k + 1];
    out.curvature.push_back(detail::circumscribed_curvature(prev, out.points[k], next));
    const Point t = detail::sub(next, prev);
    out.tangent.push_back(detail::scale(t, 1.0 / detail::norm3(t)));
  }
  return out;
}

// ---------------------------------------------------------------- ring versus MCF

struct RingTrack {
  double r0 = 0.0;
  double epsilon = 0.0;
  std::vector<double> times;
  std::vector<double> radii;
  std::vector<double> exact;
  std::vector<double> lengths;     // resampled filament length
  double window_end = 0.0;         // last tracked time with r >= 4 eps
  double last_seen = 0.0;          // last snapshot carrying a ring
  double first_empty = std::numeric_limits<double>::quiet_NaN();
  double max_rel_err = 0.0;

  static double exact_radius(double r0, double t) { return std::sqrt(std::max(r0 * r0 - 2.0 * t, 0.0)); }
  double exact_collapse() const { return 0.5 * r0 * r0; }
  /// Midpoint between the last snapshot with a ring and the first without one.
  double collapse_time() const { return std::isfinite(first_empty) ? 0.5 * (last_seen + first_empty) : last_seen; }
  double collapse_rel_err() const { return std::abs(collapse_time() - exact_collapse()) / exact_collapse(); }
  bool collapsed() const { return std::isfinite(first_empty); }

  nlohmann::json to_json() const {
    return {{"r0", r0},
            {"epsilon", epsilon},
            {"samples", times.size()},
            {"window_end", window_end},
            {"max_rel_err", max_rel_err},
            {"collapse_time", collapse_time()},
            {"exact_collapse", exact_collapse()},
            {"collapsed", collapsed()},
            {"collapse_rel_err", collapse_rel_err()}};
  }
};

/// Largest closed (non-wrapping) filament, or nullptr.
inline const Filament* main_ring(const VortexSet& vs, const TorusGeometry& g) {
  const Filament* best = nullptr;
  double best_len = 0.0;
  for (const auto& f : vs.filaments) {
    if (f.wraps != std::array<int, 3>{0, 0, 0} || f.vertices.size() < 3) continue;
    const double l = f.length(g);
    if (l > best_len) {
      best_len = l;
      best = &f;
    }
  }
  return best;
}

inline double resample_spacing(const TorusGeometry& g) {
  double h = 0.0;
  for (int a = 0; a < g.dim(); ++a) h = std::max(h, g.spacing(a));
  return 4.0 * h;
}

/// Tracks the ring radius (mean distance of the resampled filament to its centroid) and
/// compares with the shrinking circle r^2 = r0^2 - 2t until r drops below 4 eps.
inline RingTrack ring_mcf_compare(const Trajectory& traj, double r0) {
  if (traj.empty()) throw TrackingError("empty trajectory");
  if (!(r0 > 0.0)) throw InputError("ring radius must be positive");
  const TorusGeometry& g = traj.front().geom;
  if (g.dim() != 3) throw InputError("ring tracking needs a 3-torus");
  RingTrack tr;
  tr.r0 = r0;
  tr.epsilon = traj.front().epsilon;
  const double floor_r = 4.0 * tr.epsilon;
  bool window_open = true;
  for (const auto& snap : traj.snapshots) {
    const VortexSet vs = extract_vortex_set(snap);
    const Filament* ring = main_ring(vs, g);
    if (!ring) {
      if (window_open) throw TrackingError("ring lost at t = " + std::to_string(snap.time) + " before r < 4 eps");
      tr.first_empty = snap.time;
      break;
    }
    tr.last_seen = snap.time;
    if (!window_open) continue;
    const auto geo = filament_geometry(g, *ring, resample_spacing(g));
    Point c{0.0, 0.0, 0.0};
    for (const auto& p : geo.points) c = detail::add(c, p);
    c = detail::scale(c, 1.0 / double(geo.points.size()));
    double r = 0.0;
    for (const auto& p : geo.points) r += detail::norm3(detail::sub(p, c));
    r /= double(geo.points.size());
    if (r < floor_r) {
      window_open = false;
      continue;
    }
    const double re = RingTrack::exact_radius(r0, snap.time);
    tr.times.push_back(snap.time);
    tr.radii.push_back(r);
    tr.exact.push_back(re);
    tr.lengths.push_back(geo.length);
    tr.window_end = snap.time;
    tr.max_rel_err = std::max(tr.max_rel_err, re > 0.0 ? std::abs(r - re) / re : 1.0);
  }
  return tr;
}

// ---------------------------------------------------------------- Brakke diagnostic

struct BrakkeSample {
  double time = 0.0;
  double nu = 0.0;          // tube measure of chi
  double nu_one = 0.0;      // tube measure of 1
  double dnu = 0.0;         // forward difference of nu
  double curvature_term = 0.0;   // -int chi |H|^2
  double tangential_term = 0.0;  // int <grad chi, P H>
  double length = 0.0;
  double b() const { return curvature_term + tangential_term; }
  double defect() const { return dnu - b(); }
};

struct BrakkeReport {
  double tau = 0.1;
  std::vector<BrakkeSample> samples;

  bool consistent() const {
    for (const auto& s : samples)
      if (s.defect() > tau * s.nu) return false;
    return !samples.empty();
  }
  double worst_normalized_defect() const {
    double w = -std::numeric_limits<double>::infinity();
    for (const auto& s : samples) w = std::max(w, s.nu > 0.0 ? s.defect() / s.nu : 0.0);
    return w;
  }

  void write_csv(std::ostream& os) const {
    os << "t,nu,nu_one,dnu,curvature_term,tangential_term,brakke_lhs,brakke_rhs,defect,length\n";
    os.precision(12);
    for (const auto& s : samples)
      os << s.time << ',' << s.nu << ',' << s.nu_one << ',' << s.dnu << ',' << s.curvature_term << ','
         << s.tangential_term << ',' << s.dnu << ',' << s.b() << ',' << s.defect() << ',' << s.length << '\n';
  }

  nlohmann::json summary() const {
    return {{"tau", tau},
            {"samples", samples.size()},
            {"consistent", consistent()},
            {"worst_normalized_defect", samples.empty() ? nlohmann::json(nullptr) : nlohmann::json(worst_normalized_defect())}};
  }
};

inline constexpr double kTubeModulus = 0.75;

struct TubeSnapshot {
  double nu = 0.0, nu_one = 0.0, curvature_term = 0.0, tangential_term = 0.0, length = 0.0;
  bool has_filaments = false;
};

/// Tube measure {|u| < 3/4} of chi and the Brakke right side with H and P taken from the
/// nearest resampled filament point.
inline TubeSnapshot tube_snapshot(const ComplexField& field, std::span<const double> chi,
                                  const std::vector<RealGrid>& grad_chi) {
  const TorusGeometry& g = field.geom;
  const auto led = energy_density(field);
  const double L = log_scale(field.epsilon);
  const double dv = g.cell_volume();
  const VortexSet vs = extract_vortex_set(field);
  std::vector<Point> pts, curv, tang;
  TubeSnapshot ts;
  for (const auto& f : vs.filaments) {
    if (f.vertices.size() < 3) continue;
    const auto geo = filament_geometry(g, f, resample_spacing(g));
    ts.length += geo.length;
    for (std::size_t k = 0; k < geo.points.size(); ++k) {
      pts.push_back(g.wrap(geo.points[k]));
      curv.push_back(geo.curvature[k]);
      tang.push_back(geo.tangent[k]);
    }
  }
  ts.has_filaments = !pts.empty();
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    if (!(std::abs(field.values[n]) < kTubeModulus)) continue;
    const double w = led.density[n] / L * dv;
    ts.nu += chi[n] * w;
    ts.nu_one += w;
    if (pts.empty()) continue;
    const Point x = g.node_position(n);
    std::size_t best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double d = torus_distance(g, x, pts[k]);
      if (d < bd) {
        bd = d;
        best = k;
      }
    }
    const Point& H = curv[best];
    const Point& t = tang[best];
    const Point PH = detail::scale(t, detail::dot3(t, H));
    ts.curvature_term -= chi[n] * detail::dot3(H, H) * w;
    for (int a = 0; a < g.dim(); ++a) ts.tangential_term += grad_chi[a][n] * PH[a] * w;
  }
  return ts;
}

/// Forward-difference upper derivative of the tube measure against the Brakke right side,
/// sampled from t_from (after the core relaxation of planted data) until the last snapshot
/// carrying filaments.
inline BrakkeReport brakke_diagnostic(const Trajectory& traj, std::span<const double> chi, double tau = 0.1,
                                      double t_from = 0.0) {
  if (traj.size() < 2) throw InputError("Brakke diagnostic needs at least two snapshots");
  const TorusGeometry& g = traj.front().geom;
  if (g.dim() != 3) throw InputError("Brakke diagnostic needs a 3-torus");
  if (chi.size() != g.node_count()) throw InputError("test function grid does not match torus grid");
  for (double c : chi)
    if (!(c > 0.0)) throw InputError("test function must be positive");
  const auto grad_chi = real_gradient(g, chi);
  BrakkeReport rep;
  rep.tau = tau;
  std::vector<TubeSnapshot> tubes;
  std::size_t first = 0;
  while (first < traj.size() && traj.snapshots[first].time < t_from - 1e-12) ++first;
  if (first + 1 >= traj.size()) throw RangeError("fewer than two snapshots after the start time");
  for (std::size_t i = first; i < traj.size(); ++i) {
    tubes.push_back(tube_snapshot(traj.snapshots[i], chi, grad_chi));
    if (!tubes.back().has_filaments) break;
  }
  if (!tubes.front().has_filaments) throw TrackingError("no vortex filaments at the start time");
  for (std::size_t i = 0; i + 1 < tubes.size(); ++i) {
    if (!tubes[i + 1].has_filaments) break;
    BrakkeSample b;
    b.time = traj.snapshots[first + i].time;
    b.nu = tubes[i].nu;
    b.nu_one = tubes[i].nu_one;
    b.dnu = (tubes[i + 1].nu - tubes[i].nu) / (traj.snapshots[first + i + 1].time - b.time);
    b.curvature_term = tubes[i].curvature_term;
    b.tangential_term = tubes[i].tangential_term;
    b.length = tubes[i].length;
    rep.samples.push_back(b);
  }
  return rep;
}

}  // namespace glv

#endif  // GLVORTEX_MCF_HPP
