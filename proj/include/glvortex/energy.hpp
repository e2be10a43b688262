#ifndef GLVORTEX_ENERGY_HPP
#define GLVORTEX_ENERGY_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "glvortex/field.hpp"
#include "glvortex/quadrature.hpp"
#include "glvortex/trajectory.hpp"

namespace glv {

/// |log eps|, rejecting eps >= 1 where the normalisation degenerates.
inline double log_scale(double epsilon) {
  if (!(epsilon > 0.0) || epsilon >= 1.0) throw NormalizationError("energy normalisation needs 0 < epsilon < 1");
  return std::abs(std::log(epsilon));
}

struct EnergyLedger {
  TorusGeometry geom;
  RealGrid density;
  RealGrid potential;
  double total = 0.0;
  double normalized_total = 0.0;  // NaN when epsilon >= 1
  double epsilon = 0.1;
  double time = 0.0;
};

inline RealGrid potential_density(const ComplexField& field) {
  RealGrid v(field.values.size());
  const double c = 1.0 / (4.0 * field.epsilon * field.epsilon);
  for (std::size_t m = 0; m < v.size(); ++m) {
    const double w = 1.0 - std::norm(field.values[m]);
    v[m] = c * w * w;
  }
  return v;
}

inline EnergyLedger energy_from_gradient(const ComplexField& field, const std::vector<ComplexGrid>& grad) {
  EnergyLedger led;
  led.geom = field.geom;
  led.epsilon = field.epsilon;
  led.time = field.time;
  led.potential = potential_density(field);
  led.density = gradient_norm_squared(grad);
  for (std::size_t m = 0; m < led.density.size(); ++m) led.density[m] = 0.5 * led.density[m] + led.potential[m];
  led.total = integrate(field.geom, led.density);
  led.normalized_total = field.epsilon < 1.0 ? led.total / std::abs(std::log(field.epsilon)) : std::nan("");
  return led;
}

/// e = |grad u|^2 / 2 + (1 - |u|^2)^2 / (4 eps^2) and its integral.
inline EnergyLedger energy_density(const ComplexField& field) {
  return energy_from_gradient(field, spectral_gradient(field));
}

inline double total_energy(const ComplexField& field) { return energy_density(field).total; }

/// mu(A) = sum over A of e / |log eps| times the cell volume.
inline double measure_of_set(const EnergyLedger& ledger, std::span<const std::size_t> mask) {
  const double scale = log_scale(ledger.epsilon);
  // Compensated sum, so masses of disjoint masks add up to the last ulp or two.
  double s = 0.0, c = 0.0;
  for (std::size_t m : mask) {
    const double v = ledger.density.at(m), t = s + v;
    c += (std::abs(s) >= std::abs(v)) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  return (s + c) * ledger.geom.cell_volume() / scale;
}

/// Right-hand side Laplacian(u) + u (1 - |u|^2) / eps^2.
inline ComplexGrid pde_rhs(const ComplexField& field) {
  ComplexGrid r = laplacian(field.geom, field.values);
  const double c = 1.0 / (field.epsilon * field.epsilon);
  for (std::size_t m = 0; m < r.size(); ++m) r[m] += c * field.values[m] * (1.0 - std::norm(field.values[m]));
  return r;
}

enum class TimeDerivative { PdeRhs, FiniteDifference };

/// du/dt at snapshot i, either from the PDE or by centred (one-sided at the ends) differences.
inline ComplexGrid time_derivative(const Trajectory& traj, std::size_t i, TimeDerivative mode) {
  if (mode == TimeDerivative::PdeRhs || traj.size() < 2) return pde_rhs(traj.snapshots[i]);
  const std::size_t a = (i == 0) ? 0 : i - 1;
  const std::size_t b = std::min(i + 1, traj.size() - 1);
  const auto& ua = traj.snapshots[a].values;
  const auto& ub = traj.snapshots[b].values;
  const double dt = traj.snapshots[b].time - traj.snapshots[a].time;
  ComplexGrid d(ua.size());
  for (std::size_t m = 0; m < d.size(); ++m) d[m] = (ub[m] - ua[m]) / dt;
  return d;
}

struct DissipationReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double rel_err = 0.0;
  std::string chi_descriptor;
  double t_begin = 0.0;
  double t_end = 0.0;

  nlohmann::json to_json() const {
    return {{"lhs", lhs},
            {"rhs", rhs},
            {"rel_err", rel_err},
            {"chi_descriptor", chi_descriptor},
            {"time_window", {t_begin, t_end}}};
  }
};

inline double relative_mismatch(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale > 0.0 ? std::abs(a - b) / scale : 0.0;
}

/// Integrated energy identity against a fixed test function chi:
///   int e chi |_{t0}^{t1} = - int int |u_t|^2 chi - int int u_t . <grad u, grad chi>.
inline DissipationReport dissipation_check(const Trajectory& traj, std::span<const double> chi,
                                           std::string chi_descriptor = "custom",
                                           TimeDerivative mode = TimeDerivative::PdeRhs) {
  if (traj.size() < 2) throw InputError("dissipation check needs at least two snapshots");
  const TorusGeometry& g = traj.front().geom;
  if (chi.size() != g.node_count()) throw InputError("test function grid does not match torus grid");
  for (double c : chi)
    if (c < 0.0) throw InputError("test function must be non-negative");
  const auto grad_chi = real_gradient(g, chi);
  std::vector<double> t, integrand;
  double first = 0.0, last = 0.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const ComplexField& f = traj.snapshots[i];
    const auto grad = spectral_gradient(f);
    const EnergyLedger led = energy_from_gradient(f, grad);
    const ComplexGrid ut = time_derivative(traj, i, mode);
    double e_chi = 0.0, s = 0.0;
    for (std::size_t m = 0; m < chi.size(); ++m) {
      e_chi += led.density[m] * chi[m];
      double flux = 0.0;
      for (int a = 0; a < g.dim(); ++a) flux += dot(ut[m], grad[a][m]) * grad_chi[a][m];
      s += std::norm(ut[m]) * chi[m] + flux;
    }
    if (i == 0) first = e_chi * g.cell_volume();
    if (i + 1 == traj.size()) last = e_chi * g.cell_volume();
    t.push_back(f.time);
    integrand.push_back(-s * g.cell_volume());
  }
  DissipationReport r;
  r.lhs = last - first;
  r.rhs = simpson(t, integrand);
  r.rel_err = relative_mismatch(r.lhs, r.rhs);
  r.chi_descriptor = std::move(chi_descriptor);
  r.t_begin = traj.t_begin();
  r.t_end = traj.t_end();
  return r;
}

struct TestInequalitySample {
  double time = 0.0;
  double lhs = 0.0;  // 1/2 int |u_t|^2 chi^2 + d/dt int e chi^2
  double rhs = 0.0;  // 4 |grad chi|_inf^2 int_{supp chi} e
};

/// Pointwise-in-time check of the localised energy inequality with chi^2 weights.
/// d/dt is taken from the PDE, so the only slack is spatial discretisation.
inline std::vector<TestInequalitySample> energy_test_inequality(const Trajectory& traj, std::span<const double> chi) {
  const TorusGeometry& g = traj.front().geom;
  const auto grad_chi = real_gradient(g, chi);
  double grad_sup = 0.0;
  for (std::size_t m = 0; m < chi.size(); ++m) {
    double s = 0.0;
    for (int a = 0; a < g.dim(); ++a) s += grad_chi[a][m] * grad_chi[a][m];
    grad_sup = std::max(grad_sup, s);
  }
  const double support_tol = 1e-12 * *std::max_element(chi.begin(), chi.end());
  std::vector<TestInequalitySample> out;
  for (const auto& f : traj.snapshots) {
    const auto grad = spectral_gradient(f);
    const EnergyLedger led = energy_from_gradient(f, grad);
    const ComplexGrid ut = pde_rhs(f);
    double kinetic = 0.0, ddt = 0.0, supp_e = 0.0;
    for (std::size_t m = 0; m < chi.size(); ++m) {
      const double c2 = chi[m] * chi[m];
      double flux = 0.0;
      for (int a = 0; a < g.dim(); ++a) flux += dot(ut[m], grad[a][m]) * 2.0 * chi[m] * grad_chi[a][m];
      kinetic += 0.5 * std::norm(ut[m]) * c2;
      ddt += -std::norm(ut[m]) * c2 - flux;
      if (std::abs(chi[m]) > support_tol) supp_e += led.density[m];
    }
    out.push_back({f.time, (kinetic + ddt) * g.cell_volume(), 4.0 * grad_sup * supp_e * g.cell_volume()});
  }
  return out;
}

}  // namespace glv

#endif  // GLVORTEX_ENERGY_HPP
