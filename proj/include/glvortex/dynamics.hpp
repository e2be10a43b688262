#ifndef GLVORTEX_DYNAMICS_HPP
#define GLVORTEX_DYNAMICS_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <iostream>
#include <limits>
#include <random>
#include <variant>
#include <vector>

#include "glvortex/energy.hpp"
#include "glvortex/field.hpp"
#include "glvortex/trajectory.hpp"

namespace glv {

struct IntegratorConfig {
  double dt_factor = 0.2;  // dt = dt_factor * eps^2
  double t_end = 0.0;
  std::size_t snapshot_stride = 1;
  bool dealias = false;

  void validate() const {
    if (!(dt_factor > 0.0)) throw InputError("dt_factor must be positive");
    if (!(t_end >= 0.0)) throw InputError("t_end must be non-negative");
    if (snapshot_stride < 1) throw InputError("snapshot_stride must be at least 1");
  }

  /// Nominal step c eps^2.
  double nominal_dt(double epsilon) const { return dt_factor * epsilon * epsilon; }

  /// Number of equal steps covering [0, t_end] with dt no larger than nominal.
  std::size_t step_count(double epsilon) const {
    if (t_end == 0.0) return 0;
    return std::size_t(std::ceil(t_end / nominal_dt(epsilon) - 1e-9));
  }

  double dt(double epsilon) const {
    const std::size_t n = step_count(epsilon);
    return n == 0 ? nominal_dt(epsilon) : t_end / double(n);
  }
};

// ---------------------------------------------------------------- initial data

/// exp(i (2 pi k.x/L + delta sin(2 pi q.x/L))). delta = 0 gives a pure wave.
struct PhaseWave {
  std::array<int, 3> k{0, 0, 0};
  double delta = 0.0;
  std::array<int, 3> q{1, 0, 0};
};

struct VortexRing {
  Point center{0.0, 0.0, 0.0};
  double radius = 0.25;
  int axis = 2;
};

struct PlanarVortex {
  std::array<double, 2> position{0.0, 0.0};  // coordinates in the cross-section
  int degree = 1;
};

/// Straight periodic lines parallel to `axis`; positions are in the other two axes, in increasing order.
struct VortexLines {
  std::vector<PlanarVortex> lines;
  int axis = 2;
};

struct VortexPoints {
  std::vector<PlanarVortex> points;
};

/// Random smooth data: band-limited phase and modulus fields scaled so E = M0 |log eps|.
struct RandomBudget {
  double m0 = 1.0;
  std::uint64_t seed = 1;
  int max_mode = 3;
};

using InitialData = std::variant<PhaseWave, VortexRing, VortexLines, VortexPoints, RandomBudget>;

inline bool carries_vortices(const InitialData& spec) {
  return std::holds_alternative<VortexRing>(spec) || std::holds_alternative<VortexLines>(spec) ||
         std::holds_alternative<VortexPoints>(spec);
}

namespace detail {

/// Radial core profile s / sqrt(s^2 + 2 eps^2).
inline double core_profile(double s, double eps) { return s / std::sqrt(s * s + 2.0 * eps * eps); }

/// Phase factor of degree-d_j planar vortices, periodic in both cross-section axes.
/// Image rows along the second axis are summed out to +-rows; the residual
/// quasi-periodicity along that axis is removed by a linear phase.
struct PlanarPhase {
  std::vector<PlanarVortex> vortices;
  double la = 1.0, lb = 1.0;
  int rows = 6;
  double slope = 0.0;

  PlanarPhase(std::vector<PlanarVortex> v, double la_, double lb_) : vortices(std::move(v)), la(la_), lb(lb_) {
    int total = 0;
    for (const auto& p : vortices) {
      if (p.degree != 1 && p.degree != -1) throw InputError("vortex degrees must be +1 or -1");
      total += p.degree;
    }
    if (total != 0) throw InputError("total vortex degree on a torus must vanish");
    const double xa = 0.37 * la, xb = 0.11 * lb;
    slope = std::arg(raw(xa, xb + lb) / raw(xa, xb)) / lb;
  }

  cplx raw(double xa, double xb) const {
    const cplx z(xa, xb);
    cplx val(1.0, 0.0);
    for (const auto& p : vortices)
      for (int m = -rows; m <= rows; ++m) {
        const cplx s = std::sin(M_PI * (z - cplx(p.position[0], p.position[1] + m * lb)) / la);
        const double a = std::abs(s);
        if (a == 0.0) continue;
        val *= (p.degree > 0) ? s / a : std::conj(s) / a;
      }
    return val / std::abs(val);
  }

  cplx operator()(double xa, double xb) const { return raw(xa, xb) * std::polar(1.0, -slope * xb); }

  double core_distance(const TorusGeometry& g, int a, int b, double xa, double xb) const {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& p : vortices) {
      double da = std::fmod(std::abs(xa - p.position[0]), g.length(a));
      double db = std::fmod(std::abs(xb - p.position[1]), g.length(b));
      da = std::min(da, g.length(a) - da);
      db = std::min(db, g.length(b) - db);
      d = std::min(d, std::hypot(da, db));
    }
    return d;
  }
};

inline void check_resolution(const TorusGeometry& g, double eps, bool allow_underresolved) {
  if (g.max_spacing() <= 0.5 * eps) return;
  if (!allow_underresolved)
    throw InputError("grid spacing exceeds eps/2 for vortex data; refine the grid or allow under-resolution");
  std::cerr << "warning: grid spacing " << g.max_spacing() << " exceeds eps/2 = " << 0.5 * eps << "\n";
}

inline double taper(double r, double r_in, double r_out) {
  if (r <= r_in) return 1.0;
  if (r >= r_out) return 0.0;
  return 1.0 - smooth_step((r - r_in) / (r_out - r_in));
}

inline RealGrid random_smooth_field(const TorusGeometry& g, std::mt19937_64& rng, int max_mode) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const KSpace& ks = kspace(g);
  ComplexGrid spec(g.node_count(), cplx(0.0, 0.0));
  ks.for_each(g, [&](std::size_t idx, std::size_t i, std::size_t j, std::size_t k) {
    const std::array<std::size_t, 3> ijk{i, j, k};
    bool inside = true, nonzero = false;
    for (int a = 0; a < g.dim(); ++a) {
      const long n = long(g.size(a));
      const long m = (long(ijk[a]) <= n / 2) ? long(ijk[a]) : long(ijk[a]) - n;
      if (std::abs(m) > max_mode) inside = false;
      if (m != 0) nonzero = true;
    }
    if (inside && nonzero) spec[idx] = cplx(normal(rng), normal(rng));
  });
  fft_plan(g).backward(spec);
  RealGrid f = real_part(spec);  // real part of a random spectrum is a real band-limited field
  double ms = 0.0;
  for (double v : f) ms += v * v;
  ms = std::sqrt(ms / double(f.size()));
  for (double& v : f) v /= ms;
  return f;
}

}  // namespace detail

struct InitialOptions {
  bool allow_underresolved = false;
};

inline ComplexField make_initial(const TorusGeometry& g, double eps, const InitialData& spec,
                                 InitialOptions opts = {}) {
  if (!(eps > 0.0)) throw InputError("epsilon must be positive");
  if (carries_vortices(spec)) detail::check_resolution(g, eps, opts.allow_underresolved);
  ComplexField u(g, eps, 0.0);
  const std::size_t count = g.node_count();

  if (const auto* w = std::get_if<PhaseWave>(&spec)) {
    for (std::size_t m = 0; m < count; ++m) {
      const Point x = g.node_position(m);
      double phase = 0.0, pert = 0.0;
      for (int a = 0; a < g.dim(); ++a) {
        phase += 2.0 * M_PI * w->k[a] * x[a] / g.length(a);
        pert += 2.0 * M_PI * w->q[a] * x[a] / g.length(a);
      }
      u.values[m] = std::polar(1.0, phase + w->delta * std::sin(pert));
    }
  } else if (const auto* r = std::get_if<VortexRing>(&spec)) {
    if (g.dim() != 3) throw InputError("vortex rings need a three-dimensional torus");
    if (r->axis < 0 || r->axis > 2) throw InputError("ring axis must be 0, 1 or 2");
    double lmin = std::min({g.length(0), g.length(1), g.length(2)});
    if (!(r->radius > 0.0) || 2.0 * r->radius >= lmin) throw GeometryError("vortex ring does not fit in the torus");
    // The phase is tapered to zero between r_in and r_out so it matches across the box faces.
    const double r_out = 0.95 * 0.5 * lmin;
    const double r_in = 0.5 * (r->radius + r_out);
    for (std::size_t m = 0; m < count; ++m) {
      const Point d = g.displacement(g.node_position(m), r->center);
      const double zeta = d[r->axis];
      const double rho = std::sqrt(std::max(0.0, d[0] * d[0] + d[1] * d[1] + d[2] * d[2] - zeta * zeta));
      const cplx p = cplx(rho - r->radius, zeta) * cplx(rho + r->radius, -zeta);
      const double dist = std::hypot(rho - r->radius, zeta);
      const double radial = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
      const double theta = std::arg(p) * detail::taper(radial, r_in, r_out);
      u.values[m] = std::polar(detail::core_profile(dist, eps), theta);
    }
  } else if (const auto* l = std::get_if<VortexLines>(&spec)) {
    if (g.dim() != 3) throw InputError("vortex lines need a three-dimensional torus");
    if (l->axis < 0 || l->axis > 2) throw InputError("line axis must be 0, 1 or 2");
    const int a = (l->axis == 0) ? 1 : 0;
    const int b = (l->axis == 2) ? 1 : 2;
    const detail::PlanarPhase phase(l->lines, g.length(a), g.length(b));
    // The cross-section pattern is independent of the line coordinate.
    for (std::size_t m = 0; m < count; ++m) {
      const Point x = g.node_position(m);
      const double dist = phase.core_distance(g, a, b, x[a], x[b]);
      u.values[m] = detail::core_profile(dist, eps) * phase(x[a], x[b]);
    }
  } else if (const auto* p = std::get_if<VortexPoints>(&spec)) {
    if (g.dim() != 2) throw InputError("vortex points need a two-dimensional torus");
    const detail::PlanarPhase phase(p->points, g.length(0), g.length(1));
    for (std::size_t m = 0; m < count; ++m) {
      const Point x = g.node_position(m);
      const double dist = phase.core_distance(g, 0, 1, x[0], x[1]);
      u.values[m] = detail::core_profile(dist, eps) * phase(x[0], x[1]);
    }
  } else if (const auto* rb = std::get_if<RandomBudget>(&spec)) {
    if (!(rb->m0 > 0.0)) throw InputError("energy budget must be positive");
    const double target = rb->m0 * log_scale(eps);
    std::mt19937_64 rng(rb->seed);
    const RealGrid theta = detail::random_smooth_field(g, rng, rb->max_mode);
    const RealGrid eta = detail::random_smooth_field(g, rng, rb->max_mode);
    auto build = [&](double amp) {
      ComplexField f(g, eps, 0.0);
      for (std::size_t m = 0; m < count; ++m)
        f.values[m] = std::polar(1.0 - 0.1 * std::tanh(amp * eta[m]), amp * theta[m]);
      return f;
    };
    double lo = 0.0, hi = 1.0;
    while (total_energy(build(hi)) < target) {
      hi *= 2.0;
      if (hi > 1e6) throw InputError("energy budget unreachable");
    }
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total_energy(build(mid)) < target ? lo : hi) = mid;
    }
    u = build(0.5 * (lo + hi));
  }
  return u;
}

/// E(u) / |log eps|, the empirical M0 of the data.
inline double energy_budget(const ComplexField& u) { return energy_density(u).normalized_total; }

// ---------------------------------------------------------------- integrator

/// Strang splitting of the flow: half a reaction step, an exact heat step, half
/// a reaction step. Both sub-flows are solved exactly: the reaction ODE keeps
/// the phase and evolves |u|^2 logistically.
class PglIntegrator {
 public:
  PglIntegrator(const TorusGeometry& g, double eps, double dt, bool dealias = false)
      : geom_(g), eps_(eps), dt_(dt), dealias_(dealias), heat_(g.node_count()) {
    if (!(dt > 0.0)) throw InputError("time step must be positive");
    const KSpace& ks = kspace(g);
    ks.for_each(g, [&](std::size_t idx, std::size_t i, std::size_t j, std::size_t k) {
      heat_[idx] = std::exp(-ks.k2(i, j, k) * dt);
    });
    if (dealias) {
      ks.for_each(g, [&](std::size_t idx, std::size_t i, std::size_t j, std::size_t k) {
        const std::array<std::size_t, 3> ijk{i, j, k};
        for (int a = 0; a < g.dim(); ++a)
          if (std::sqrt(ks.squared[a][ijk[a]]) > (2.0 / 3.0) * ks.k_max[a]) heat_[idx] = 0.0;
      });
    }
    growth_ = std::exp(dt / (eps * eps));  // exp(2 (dt/2) / eps^2)
  }

  double dt() const noexcept { return dt_; }

  void advance(ComplexGrid& u, std::size_t step_index) const {
    react(u);
    const FftPlan& plan = fft_plan(geom_);
    plan.forward(u);
    for (std::size_t m = 0; m < u.size(); ++m) u[m] *= heat_[m];
    plan.backward(u);
    react(u);
    for (const cplx& v : u)
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
        throw NumericalBlowup(step_index, "non-finite value in integrator state");
  }

 private:
  void react(ComplexGrid& u) const {
    const double e = growth_;
    for (cplx& v : u) {
      const double r2 = std::norm(v);
      v *= std::sqrt(e / (1.0 + r2 * (e - 1.0)));
    }
  }

  TorusGeometry geom_;
  double eps_;
  double dt_;
  bool dealias_;
  RealGrid heat_;
  double growth_;
};

/// Advances a field by one step of size cfg.dt(eps).
inline ComplexField step(const ComplexField& field, const IntegratorConfig& cfg) {
  cfg.validate();
  field.validate();
  const double dt = cfg.t_end > 0.0 ? cfg.dt(field.epsilon) : cfg.nominal_dt(field.epsilon);
  PglIntegrator integ(field.geom, field.epsilon, dt, cfg.dealias);
  ComplexField out = field;
  integ.advance(out.values, 0);
  out.time = field.time + dt;
  return out;
}

/// Called for every stored snapshot with (field, total energy, step index).
using SnapshotObserver = std::function<void(const ComplexField&, double, std::size_t)>;

inline void check_modulus_bound(const ComplexField& f, std::size_t step_index) {
  if (f.max_modulus() > 3.0) throw NumericalBlowup(step_index, "modulus exceeded the a-priori bound 3");
}

/// Runs cfg.step_count steps from `field`, streaming every snapshot_stride-th state
/// (and always the first and last) to the observer.
inline void evolve(const ComplexField& field, const IntegratorConfig& cfg, const SnapshotObserver& observer) {
  cfg.validate();
  field.validate();
  const std::size_t n = cfg.step_count(field.epsilon);
  ComplexField u = field;
  observer(u, total_energy(u), 0);
  if (n == 0) return;
  const double dt = cfg.dt(field.epsilon);
  PglIntegrator integ(field.geom, field.epsilon, dt, cfg.dealias);
  for (std::size_t s = 1; s <= n; ++s) {
    integ.advance(u.values, s);
    u.time = field.time + double(s) * dt;
    if (s % cfg.snapshot_stride == 0 || s == n) {
      check_modulus_bound(u, s);
      observer(u, total_energy(u), s);
    }
  }
}

inline Trajectory evolve(const ComplexField& field, const IntegratorConfig& cfg) {
  Trajectory traj;
  evolve(field, cfg, [&](const ComplexField& f, double e, std::size_t) { traj.push(f, e); });
  return traj;
}

}  // namespace glv

#endif  // GLVORTEX_DYNAMICS_HPP
