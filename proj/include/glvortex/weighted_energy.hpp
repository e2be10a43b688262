#ifndef GLVORTEX_WEIGHTED_ENERGY_HPP
#define GLVORTEX_WEIGHTED_ENERGY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glvortex/energy.hpp"
#include "glvortex/kernel.hpp"
#include "glvortex/quadrature.hpp"
#include "glvortex/trajectory.hpp"

namespace glv {

/// A space-time point (x, t).
struct SpaceTimePoint {
  Point x{0.0, 0.0, 0.0};
  double t = 0.0;
};

/// Energy density at time t, linearly interpolated between neighbouring snapshots.
inline RealGrid energy_density_at(const Trajectory& traj, double t) {
  const auto [lo, w] = traj.bracket(t);
  RealGrid e = energy_density(traj.snapshots[lo]).density;
  if (w == 0.0) return e;
  const RealGrid e1 = energy_density(traj.snapshots[lo + 1]).density;
  for (std::size_t m = 0; m < e.size(); ++m) e[m] = (1.0 - w) * e[m] + w * e1[m];
  return e;
}

inline double kernel_weighted(const TorusGeometry& g, std::span<const double> density, const KernelEval& k) {
  double s = 0.0;
  for (std::size_t m = 0; m < density.size(); ++m) s += density[m] * k.values[m];
  return s * g.cell_volume();
}

/// R^2 int e(u(t* - R^2)) K(R^2; x*).
inline double weighted_energy(const Trajectory& traj, const SpaceTimePoint& z, double radius,
                              const CapFunction& cap = default_cap()) {
  if (!(radius > 0.0)) throw DomainError("weighted energy radius must be positive");
  const double t = z.t - radius * radius;
  const TorusGeometry& g = traj.front().geom;
  const RealGrid e = energy_density_at(traj, t);
  return radius * radius * kernel_weighted(g, e, kernel(g, cap, z.x, radius * radius));
}

/// Nodewise Xi, Phi, Psi for the field at time t and the backward kernel about z_T.
struct ErrorIntegrands {
  double s = 0.0;  // T - t
  RealGrid xi;     // s |u_t + <grad u, grad K>/K|^2 (not multiplied by K)
  RealGrid xi_k;   // Xi K
  RealGrid phi;
  RealGrid psi;
  RealGrid potential_k;  // V K
  RealGrid energy_k;     // e K
};

/// Relative kernel floor below which divisions by K are skipped (the terms are
/// then zero to the precision of the grid).
inline constexpr double kKernelFloor = 1e-13;

inline ErrorIntegrands error_integrands(const ComplexField& field, const SpaceTimePoint& z_T,
                                        const CapFunction& cap = default_cap()) {
  const double s = z_T.t - field.time;
  if (!(s > 0.0)) throw DomainError("error integrands need t < T");
  const TorusGeometry& g = field.geom;
  const int n = g.dim();
  const KernelEval k = kernel(g, cap, z_T.x, s);
  const KernelDerivatives dk = kernel_derivatives(g, k);
  const auto grad = spectral_gradient(field);
  const EnergyLedger led = energy_from_gradient(field, grad);
  const ComplexGrid ut = pde_rhs(field);
  const double floor = kKernelFloor * kernel_peak(n, s);

  ErrorIntegrands out;
  out.s = s;
  const std::size_t count = g.node_count();
  out.xi.assign(count, 0.0);
  out.xi_k.assign(count, 0.0);
  out.phi.assign(count, 0.0);
  out.psi.resize(count);
  out.potential_k.resize(count);
  out.energy_k.resize(count);
  for (std::size_t m = 0; m < count; ++m) {
    const double K = k.values[m];
    out.potential_k[m] = led.potential[m] * K;
    out.energy_k[m] = led.density[m] * K;
    out.psi[m] = s * led.density[m] * (dk.dtau[m] - dk.laplacian[m]);
    if (K < floor) continue;
    cplx gk(0.0, 0.0);
    double hess = 0.0, g2 = 0.0;
    for (int a = 0; a < n; ++a) {
      gk += grad[a][m] * dk.gradient[a][m];
      g2 += std::norm(grad[a][m]);
      for (int b = 0; b < n; ++b) hess += dk.hessian[a][b][m] * dot(grad[a][m], grad[b][m]);
    }
    out.xi[m] = s * std::norm(ut[m] + gk / K);
    out.xi_k[m] = out.xi[m] * K;
    out.phi[m] = s * (hess - std::norm(gk) / K + g2 * K / (2.0 * s));
  }
  return out;
}

/// Integrated terms of the Z(R) derivative at s = R^2 = T - t.
struct ZTerms {
  double s = 0.0;
  double z = 0.0;        // s int e K
  double pot = 0.0;      // int V K
  double xi = 0.0;       // int Xi K
  double phi = 0.0;      // int Phi
  double psi = 0.0;      // int Psi
  double dz_ds() const { return pot + xi + phi + psi; }
};

inline ZTerms z_terms(const ComplexField& field, const SpaceTimePoint& z_T, const CapFunction& cap = default_cap()) {
  const ErrorIntegrands ei = error_integrands(field, z_T, cap);
  const TorusGeometry& g = field.geom;
  ZTerms t;
  t.s = ei.s;
  t.z = ei.s * integrate(g, ei.energy_k);
  t.pot = integrate(g, ei.potential_k);
  t.xi = integrate(g, ei.xi_k);
  t.phi = integrate(g, ei.phi);
  t.psi = integrate(g, ei.psi);
  return t;
}

// ---------------------------------------------------------------- monotonicity

struct MonotonicityLedger {
  SpaceTimePoint center;
  double e0 = 0.0;
  double tau_mono = 1e-3;
  std::vector<double> radii;
  std::vector<double> z_values;
  std::vector<double> dz_dr;  // Z'(R) = 2R (pot + xi + phi + psi)
  std::vector<double> dz_reconstructed;  // integral of dZ/ds over [R_{i-1}^2, R_i^2] (0 for the first radius)
  std::vector<double> xi_integral, phi_integral, psi_integral, potential_integral;
  std::vector<bool> monotone_ok;  // per interval ending at this radius (true for the first)

  /// max_i |reconstructed increment - (Z_i - Z_{i-1})| / max_i |Z_i - Z_{i-1}|.
  double derivative_mismatch() const {
    double worst = 0.0, scale = 0.0;
    for (std::size_t i = 1; i < radii.size(); ++i) {
      const double dz = z_values[i] - z_values[i - 1];
      worst = std::max(worst, std::abs(dz_reconstructed[i] - dz));
      scale = std::max(scale, std::abs(dz));
    }
    return scale > 0.0 ? worst / scale : worst;
  }

  /// |sum of reconstructed increments - (Z(R_max) - Z(R_min))| relative to the latter.
  double total_mismatch() const {
    if (radii.size() < 2) return 0.0;
    double rec = 0.0;
    for (double v : dz_reconstructed) rec += v;
    const double dz = z_values.back() - z_values.front();
    const double scale = std::max(std::abs(dz), std::abs(rec));
    return scale > 0.0 ? std::abs(rec - dz) / scale : 0.0;
  }

  bool monotone() const { return std::all_of(monotone_ok.begin(), monotone_ok.end(), [](bool b) { return b; }); }

  /// Smallest C1 (with C2 = 0) making r -> C1 E0 r + Z(r) non-decreasing on the samples.
  double fitted_c1() const {
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
      c = std::max(c, -(z_values[i + 1] - z_values[i]) / (e0 * (radii[i + 1] - radii[i])));
    return c;
  }

  /// Smallest C2 (with C1 = 0) making r -> exp(C2 r) Z(r) non-decreasing; infinite if Z changes sign downward.
  double fitted_c2() const {
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < radii.size(); ++i) {
      const double a = z_values[i], b = z_values[i + 1];
      if (b >= a) continue;
      if (b <= 0.0) return std::numeric_limits<double>::infinity();
      c = std::max(c, std::log(a / b) / (radii[i + 1] - radii[i]));
    }
    return c;
  }

  void write_csv(std::ostream& os) const {
    os << "R,Z,dZ_reconstructed,xi_int,phi_int,psi_int,pot_int,monotone_ok\n";
    os.precision(12);
    for (std::size_t i = 0; i < radii.size(); ++i)
      os << radii[i] << ',' << z_values[i] << ',' << dz_reconstructed[i] << ',' << xi_integral[i] << ',' << phi_integral[i]
         << ',' << psi_integral[i] << ',' << potential_integral[i] << ',' << (monotone_ok[i] ? 1 : 0) << '\n';
  }

  nlohmann::json summary() const {
    return {{"center", {center.x[0], center.x[1], center.x[2], center.t}},
            {"radii", radii.size()},
            {"monotone", monotone()},
            {"derivative_mismatch", derivative_mismatch()},
            {"total_mismatch", total_mismatch()},
            {"fitted_c1", fitted_c1()},
            {"fitted_c2", fitted_c2()},
            {"tau_mono", tau_mono}};
  }
};

/// Radii R_i with R_i^2 = T - t_k for snapshot times t_k, geometrically thinned to `count` values
/// within [r_min, r_max]. Aligning radii with snapshots avoids time interpolation.
inline std::vector<double> snapshot_aligned_radii(const Trajectory& traj, double T, double r_min, double r_max,
                                                  std::size_t count) {
  std::vector<double> avail;
  for (const auto& s : traj.snapshots) {
    const double r2 = T - s.time;
    if (r2 <= 0.0) continue;
    const double r = std::sqrt(r2);
    if (r >= r_min * (1 - 1e-12) && r <= r_max * (1 + 1e-12)) avail.push_back(r);
  }
  std::sort(avail.begin(), avail.end());
  if (avail.size() <= count) return avail;
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double target = r_min * std::pow(r_max / r_min, double(i) / double(count - 1));
    auto it = std::min_element(avail.begin(), avail.end(),
                               [&](double a, double b) { return std::abs(a - target) < std::abs(b - target); });
    if (out.empty() || *it > out.back()) out.push_back(*it);
  }
  return out;
}

inline MonotonicityLedger monotonicity_scan(const Trajectory& traj, const SpaceTimePoint& z_T,
                                            std::span<const double> radii, double tau_mono = 1e-3,
                                            const CapFunction& cap = default_cap()) {
  if (radii.empty()) throw InputError("monotonicity scan needs at least one radius");
  const double r_cap = std::min(std::sqrt(z_T.t - traj.t_begin()), 1.0);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (!(radii[i] > 0.0) || radii[i] > r_cap * (1 + 1e-12)) throw RangeError("radius outside (0, min(sqrt(T),1)]");
    if (i > 0 && !(radii[i] > radii[i - 1])) throw InputError("radii must be strictly increasing");
  }
  MonotonicityLedger led;
  led.center = z_T;
  led.e0 = traj.energies.front();
  led.tau_mono = tau_mono;
  for (double r : radii) {
    const ComplexField u = traj.at(z_T.t - r * r);
    const ZTerms t = z_terms(u, z_T, cap);
    led.radii.push_back(r);
    led.z_values.push_back(t.z);
    led.dz_dr.push_back(2.0 * r * t.dz_ds());
    led.xi_integral.push_back(t.xi);
    led.phi_integral.push_back(t.phi);
    led.psi_integral.push_back(t.psi);
    led.potential_integral.push_back(t.pot);
    const std::size_t i = led.radii.size() - 1;
    led.monotone_ok.push_back(i == 0 || led.z_values[i] - led.z_values[i - 1] >=
                                            -tau_mono * led.e0 * (led.radii[i] - led.radii[i - 1]));
  }

  // dZ/ds is also sampled at every stored snapshot between consecutive radii, so the
  // increments are resolved on the trajectory's own time grid.
  led.dz_reconstructed.assign(radii.size(), 0.0);
  for (std::size_t i = 1; i < radii.size(); ++i) {
    const double s0 = radii[i - 1] * radii[i - 1], s1 = radii[i] * radii[i];
    std::vector<double> s{s0}, f{led.dz_dr[i - 1] / (2.0 * radii[i - 1])};
    for (auto it = traj.snapshots.rbegin(); it != traj.snapshots.rend(); ++it) {
      const double si = z_T.t - it->time;
      if (si <= s0 * (1 + 1e-12) || si >= s1 * (1 - 1e-12)) continue;
      s.push_back(si);
      f.push_back(z_terms(*it, z_T, cap).dz_ds());
    }
    s.push_back(s1);
    f.push_back(led.dz_dr[i] / (2.0 * radii[i]));
    led.dz_reconstructed[i] = simpson(s, f);
  }
  return led;
}

// ---------------------------------------------------------------- integrated identity

struct IntegratedIdentityReport {
  double lhs = 0.0;        // weighted energy at scale sqrt(T)
  double rhs = 0.0;        // near + pot_xi + phi + psi
  double near_field = 0.0; // Z at the smallest resolved scale
  double pot_xi = 0.0;
  double phi = 0.0;
  double psi = 0.0;
  double s_min = 0.0;
  double rel_err = 0.0;

  nlohmann::json to_json() const {
    return {{"lhs", lhs},       {"rhs", rhs}, {"near_field", near_field}, {"pot_xi", pot_xi},
            {"phi", phi},       {"psi", psi}, {"s_min", s_min},           {"rel_err", rel_err}};
  }
};

/// Weighted energy at scale sqrt(T) against the time integral of its derivative.
///
/// The kernel cannot be resolved for s = T - t below a few grid spacings squared,
/// so the integral runs over s in [s_min, T] and Z(sqrt(s_min)) is added as a
/// near-field term. s_min is the smallest snapshot-aligned value >= (min_cells h)^2.
inline IntegratedIdentityReport time_integrated_identity(const Trajectory& traj, const SpaceTimePoint& z_T,
                                                         double min_cells = 2.0,
                                                         const CapFunction& cap = default_cap()) {
  const TorusGeometry& g = traj.front().geom;
  const double T = z_T.t;
  if (traj.t_begin() > 1e-14 || T > traj.t_end() * (1 + 1e-12)) throw RangeError("trajectory must cover [0, T]");
  const double floor = std::pow(min_cells * g.max_spacing(), 2);
  std::vector<double> t, integrand;
  std::vector<double> phis, psis, pxs;
  ZTerms last{};
  for (const auto& snap : traj.snapshots) {
    if (T - snap.time < floor) break;
    const ZTerms zt = z_terms(snap, z_T, cap);
    t.push_back(snap.time);
    integrand.push_back(zt.dz_ds());
    pxs.push_back(zt.pot + zt.xi);
    phis.push_back(zt.phi);
    psis.push_back(zt.psi);
    last = zt;
  }
  if (t.size() < 2) throw RangeError("trajectory too short for the integrated identity");
  IntegratedIdentityReport r;
  r.s_min = last.s;
  r.near_field = last.z;
  r.pot_xi = simpson(t, pxs);
  r.phi = simpson(t, phis);
  r.psi = simpson(t, psis);
  r.rhs = r.near_field + simpson(t, integrand);
  r.lhs = T * kernel_weighted(g, energy_density(traj.front()).density, kernel(g, cap, z_T.x, T));
  r.rel_err = relative_mismatch(r.lhs, r.rhs);
  return r;
}

// ---------------------------------------------------------------- comparison and localisation

struct ComparisonReport {
  double lhs = 0.0;     // weighted energy about z* at scale sqrt(t*)
  double bound = 0.0;   // prefactor times weighted energy about z_T at scale sqrt(T)
  double prefactor = 0.0;
  double margin = 0.0;  // bound - lhs
  bool holds() const { return lhs <= bound; }
  nlohmann::json to_json() const {
    return {{"lhs", lhs}, {"bound", bound}, {"prefactor", prefactor}, {"margin", margin}, {"holds", holds()}};
  }
};

inline ComparisonReport comparison_inequality(const Trajectory& traj, const SpaceTimePoint& z_star,
                                              const SpaceTimePoint& z_T, const CapFunction& cap = default_cap()) {
  if (!(z_star.t > 0.0 && z_star.t < z_T.t)) throw DomainError("comparison needs 0 < t* < T");
  const TorusGeometry& g = traj.front().geom;
  const int n = g.dim();
  ComparisonReport r;
  r.lhs = weighted_energy(traj, z_star, std::sqrt(z_star.t - traj.t_begin()), cap);
  const double rhs = weighted_energy(traj, z_T, std::sqrt(z_T.t - traj.t_begin()), cap);
  const double dp = d_plus(g, cap, z_T.x, z_star.x);
  r.prefactor = std::pow(z_T.t / z_star.t, 0.5 * n - 1.0) *
                std::exp(cap.comparison_constant() * dp * dp / (z_T.t - z_star.t));
  r.bound = r.prefactor * rhs;
  r.margin = r.bound - r.lhs;
  return r;
}

struct LocalizationReport {
  double lambda = 0.0;
  double lhs = 0.0;
  double ball_term = 0.0;
  double tail_term = 0.0;
  double margin = 0.0;
  bool holds() const { return lhs <= ball_term + tail_term; }
  nlohmann::json to_json() const {
    return {{"lambda", lambda}, {"lhs", lhs}, {"ball_term", ball_term}, {"tail_term", tail_term},
            {"margin", margin}, {"holds", holds()}};
  }
};

/// Gaussian-weighted energy at time T against the ball energy plus the tail bound,
/// with empirical constants c1, c2 and M0 = E0 / |log eps|.
inline LocalizationReport localization_bound(const Trajectory& traj, const Point& x_T, double T, double R,
                                             double lambda, double c1, double c2,
                                             const CapFunction& cap = default_cap()) {
  const ComplexField& first = traj.front();
  const double eps = first.epsilon;
  if (!(R > std::sqrt(2.0 * eps) && R < 1.0)) throw DomainError("localisation needs sqrt(2 eps) < R < 1");
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  const TorusGeometry& g = first.geom;
  const int n = g.dim();
  const RealGrid e = energy_density_at(traj, T);
  LocalizationReport r;
  r.lambda = lambda;
  double lhs = 0.0, ball = 0.0;
  for (std::size_t m = 0; m < e.size(); ++m) {
    const double d = torus_distance(g, g.node_position(m), x_T);
    const double dp = d_plus_from_distance(g, cap, d);
    lhs += e[m] * std::exp(-dp * dp / (4.0 * R * R));
    if (d < lambda * R) ball += e[m];
  }
  r.lhs = lhs * g.cell_volume();
  r.ball_term = ball * g.cell_volume();
  const double log_eps = log_scale(eps);
  const double m0 = traj.energies.front() / log_eps;
  const double cs = g.c_star();
  r.tail_term = m0 * std::exp(-cs * cs * lambda * lambda / 8.0) *
                (std::exp(c2) * std::pow(2.0 * R * R / (T + 2.0 * R * R), 0.5 * (n - 2)) +
                 c1 * std::pow(4.0 * M_PI, 0.5 * n) * std::pow(std::sqrt(2.0) * R, n - 2) * std::sqrt(T)) *
                log_eps;
  r.margin = r.ball_term + r.tail_term - r.lhs;
  return r;
}

}  // namespace glv

#endif  // GLVORTEX_WEIGHTED_ENERGY_HPP
