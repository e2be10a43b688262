#ifndef GLVORTEX_HODGE_HPP
#define GLVORTEX_HODGE_HPP

#include <array>
#include <cmath>
#include <vector>

#include <json.hpp>

#include "glvortex/energy.hpp"
#include "glvortex/errors.hpp"
#include "glvortex/field.hpp"
#include "glvortex/trajectory.hpp"

namespace glv {

/// form = d(phi) + codifferential(psi) + gamma + zeta.
struct HodgeParts {
  RealGrid phi;                      // zero mean
  TwoForm psi;                       // exact 2-form, so d(psi) = 0
  std::array<double, 3> gamma{0.0, 0.0, 0.0};
  OneForm zeta;                      // modes the derivative symbol cannot see (pure Nyquist)

  OneForm exact_part() const { return exterior_derivative(zeta.geom, phi, zeta.time); }
  OneForm coexact_part() const { return codifferential(psi); }
  OneForm harmonic_part() const {
    OneForm h(zeta.geom, zeta.time);
    for (std::size_t a = 0; a < h.components.size(); ++a) std::fill(h.components[a].begin(), h.components[a].end(), gamma[a]);
    return h;
  }
  OneForm reconstruct() const { return exact_part() + coexact_part() + harmonic_part() + zeta; }
};

inline HodgeParts hodge_decompose(const OneForm& form) {
  const TorusGeometry& g = form.geom;
  const int n = g.dim();
  const KSpace& ks = kspace(g);
  const FftPlan& plan = fft_plan(g);
  std::vector<ComplexGrid> spec;
  for (int a = 0; a < n; ++a) spec.push_back(forward_transform(g, to_complex(form.components[a])));

  HodgeParts p;
  p.zeta = OneForm(g, form.time);
  p.psi = TwoForm(g, form.time);
  ComplexGrid phi(g.node_count());
  std::vector<ComplexGrid> psi(TwoForm::pair_count(n), ComplexGrid(g.node_count()));
  std::vector<ComplexGrid> zeta(n, ComplexGrid(g.node_count()));
  ks.for_each(g, [&](std::size_t idx, std::size_t i, std::size_t j, std::size_t k) {
    std::array<double, 3> kap{};
    double k2 = 0.0;
    for (int a = 0; a < n; ++a) {
      kap[a] = ks.kd(a, i, j, k);
      k2 += kap[a] * kap[a];
    }
    if (idx == 0) return;  // the mean goes to gamma
    if (k2 == 0.0) {
      for (int a = 0; a < n; ++a) zeta[a][idx] = spec[a][idx];
      return;
    }
    cplx div(0.0, 0.0);
    for (int a = 0; a < n; ++a) div += kap[a] * spec[a][idx];
    phi[idx] = cplx(0.0, -1.0) * div / k2;
    for (int a = 0; a < n; ++a)
      for (int b = a + 1; b < n; ++b)
        psi[TwoForm::pair_index(a, b)][idx] = cplx(0.0, 1.0) * (kap[a] * spec[b][idx] - kap[b] * spec[a][idx]) / k2;
  });
  const double count = double(g.node_count());
  for (int a = 0; a < n; ++a) p.gamma[a] = spec[a][0].real() / count;
  plan.backward(phi);
  p.phi = real_part(phi);
  for (std::size_t c = 0; c < psi.size(); ++c) {
    plan.backward(psi[c]);
    p.psi.components[c] = real_part(psi[c]);
  }
  for (int a = 0; a < n; ++a) {
    plan.backward(zeta[a]);
    p.zeta.components[a] = real_part(zeta[a]);
  }
  return p;
}

struct OrthogonalityDefects {
  double exact_coexact = 0.0;
  double exact_harmonic = 0.0;
  double coexact_harmonic = 0.0;
  double reconstruction = 0.0;  // max nodewise
  double max() const { return std::max({exact_coexact, exact_harmonic, coexact_harmonic, reconstruction}); }
};

/// Cross inner products of the three parts, relative to |form|^2, and the nodewise reconstruction error
/// relative to max |form|.
inline OrthogonalityDefects hodge_defects(const OneForm& form, const HodgeParts& p) {
  const OneForm e = p.exact_part(), c = p.coexact_part(), h = p.harmonic_part();
  const double norm2 = std::max(inner(form, form), 1e-300);
  OrthogonalityDefects d;
  d.exact_coexact = std::abs(inner(e, c)) / norm2;
  d.exact_harmonic = std::abs(inner(e, h)) / norm2;
  d.coexact_harmonic = std::abs(inner(c, h)) / norm2;
  d.reconstruction = max_abs(p.reconstruct() - form) / std::max(max_abs(form), 1e-300);
  return d;
}

// ---------------------------------------------------------------- winding

/// Periods of a 1-form against the fundamental cycles in units of 2 pi.
struct WindingVector {
  std::array<double, 3> raw{0.0, 0.0, 0.0};
  std::array<long, 3> integer{0, 0, 0};  // nearest integer per axis

  double defect() const {
    double d = 0.0;
    for (int a = 0; a < 3; ++a) d = std::max(d, std::abs(raw[a] - double(integer[a])));
    return d;
  }
};

inline WindingVector winding_from_gamma(const TorusGeometry& g, const std::array<double, 3>& gamma) {
  WindingVector w;
  for (int a = 0; a < g.dim(); ++a) {
    w.raw[a] = gamma[a] * g.length(a) / (2.0 * M_PI);
    w.integer[a] = std::lround(w.raw[a]);
  }
  return w;
}

inline WindingVector winding(const OneForm& form) {
  const TorusGeometry& g = form.geom;
  std::array<double, 3> gamma{0.0, 0.0, 0.0};
  for (int a = 0; a < g.dim(); ++a) {
    double s = 0.0;
    for (double v : form.components[a]) s += v;
    gamma[a] = s / double(g.node_count());
  }
  return winding_from_gamma(g, gamma);
}

/// Period of the form along the grid line through node 0 in direction `axis`, in units of 2 pi.
inline double line_period(const OneForm& form, int axis, std::size_t start = 0) {
  const TorusGeometry& g = form.geom;
  auto ijk = g.unravel(start);
  double s = 0.0;
  for (std::size_t m = 0; m < g.size(axis); ++m) {
    ijk[axis] = m;
    s += form.components[axis][g.index(ijk[0], ijk[1], ijk[2])];
  }
  return s * g.spacing(axis) / (2.0 * M_PI);
}

/// exp(i sum_k n_k 2 pi x_k / L_k) for the integer part of the winding.
inline ComplexField harmonic_floor_map(const TorusGeometry& g, const WindingVector& w, double epsilon = 0.1) {
  ComplexField u(g, epsilon);
  for (std::size_t m = 0; m < g.node_count(); ++m) {
    const Point x = g.node_position(m);
    double theta = 0.0;
    for (int a = 0; a < g.dim(); ++a) theta += 2.0 * M_PI * double(w.integer[a]) * x[a] / g.length(a);
    u.values[m] = std::polar(1.0, theta);
  }
  return u;
}

// ---------------------------------------------------------------- gauge

inline constexpr double kWindingThreshold = 0.25;

struct GaugeSnapshot {
  double time = 0.0;
  RealGrid phi;
  ComplexField w;
  double grad_phi_sup = 0.0;             // sup |grad phi| / sqrt((M0 + 1) |log eps|)
  std::array<double, 3> grad_w_lp{};     // ||grad w||_p for p in gauge_exponents
  double grad_u_l2_sq = 0.0;             // ||grad u||_2^2
  double modulus_defect = 0.0;           // max | |w| - |u| |
  double transference_defect = 0.0;      // max nodewise defect of the current identity
};

struct GaugeResult {
  WindingVector winding;
  ComplexField u_h;
  std::array<double, 3> exponents{};
  std::vector<GaugeSnapshot> snapshots;
  double a_eps = 0.0;        // time average of the mean of u x u_t
  double a_eps_scale = 0.0;  // eps |log eps|
  double m0 = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json snaps = nlohmann::json::array();
    for (const auto& s : snapshots)
      snaps.push_back({{"time", s.time},
                       {"grad_phi_sup_normalized", s.grad_phi_sup},
                       {"grad_w_lp", s.grad_w_lp},
                       {"grad_u_l2_sq", s.grad_u_l2_sq},
                       {"modulus_defect", s.modulus_defect},
                       {"transference_defect", s.transference_defect}});
    return {{"winding_raw", winding.raw}, {"winding_integer", winding.integer},
            {"exponents", exponents},     {"a_eps", a_eps},
            {"a_eps_scale", a_eps_scale}, {"m0", m0},
            {"snapshots", snaps}};
  }
};

inline std::array<double, 3> gauge_exponents(int dim) { return {1.0, 1.1, double(dim + 1) / dim - 0.01}; }

inline double gradient_lp_norm(const std::vector<ComplexGrid>& grad, const TorusGeometry& g, double p) {
  double s = 0.0;
  for (std::size_t m = 0; m < grad.front().size(); ++m) {
    double q = 0.0;
    for (const auto& c : grad) q += std::norm(c[m]);
    s += std::pow(q, 0.5 * p);
  }
  return std::pow(s * g.cell_volume(), 1.0 / p);
}

/// u = w exp(i phi) u_h on [t1, t2]: u_h from the winding of ju(t1), phi the heat flow of the
/// exact potential of ju(t1), and w the remainder.
inline GaugeResult gauge_decompose(const Trajectory& traj, double t1, double t2) {
  if (!(t2 >= t1)) throw InputError("gauge window must satisfy t1 <= t2");
  traj.bracket(t1);
  traj.bracket(t2);
  const ComplexField u1 = traj.at(t1);
  const TorusGeometry& g = u1.geom;
  const int n = g.dim();
  const HodgeParts parts = hodge_decompose(current(u1));
  GaugeResult r;
  r.winding = winding_from_gamma(g, parts.gamma);
  if (r.winding.defect() > kWindingThreshold)
    throw DecompositionUnstable("winding of the current is not close to an integer vector");
  r.u_h = harmonic_floor_map(g, r.winding, u1.epsilon);
  r.exponents = gauge_exponents(n);
  const double log_eps = log_scale(u1.epsilon);
  r.m0 = traj.energies.front() / log_eps;
  r.a_eps_scale = u1.epsilon * log_eps;
  std::array<double, 3> gamma_h{0.0, 0.0, 0.0};
  for (int a = 0; a < n; ++a) gamma_h[a] = 2.0 * M_PI * double(r.winding.integer[a]) / g.length(a);

  const ComplexGrid phi0 = to_complex(parts.phi);
  std::vector<double> times, a_samples;
  for (const auto& snap : traj.snapshots) {
    if (snap.time < t1 - 1e-12 || snap.time > t2 + 1e-12) continue;
    GaugeSnapshot gs;
    gs.time = snap.time;
    ComplexGrid phi = phi0;
    heat_flow(g, phi, snap.time - t1);
    gs.phi = real_part(phi);
    gs.w = snap;
    for (std::size_t m = 0; m < g.node_count(); ++m)
      gs.w.values[m] = snap.values[m] * std::polar(1.0, -gs.phi[m]) * std::conj(r.u_h.values[m]);
    const auto grad_u = spectral_gradient(snap);
    const auto grad_w = spectral_gradient(gs.w);
    const auto grad_phi = real_gradient(g, gs.phi);
    const OneForm ju = current_from_gradient(snap, grad_u);
    const OneForm jw = current_from_gradient(gs.w, grad_w);
    double sup = 0.0;
    for (std::size_t m = 0; m < g.node_count(); ++m) {
      double q = 0.0;
      const double mod2 = std::norm(snap.values[m]);
      for (int a = 0; a < n; ++a) {
        q += grad_phi[a][m] * grad_phi[a][m];
        const double f = grad_phi[a][m] + gamma_h[a];
        const double rhs = ju.components[a][m] - f + (1.0 - mod2) * f;
        gs.transference_defect = std::max(gs.transference_defect, std::abs(jw.components[a][m] - rhs));
      }
      sup = std::max(sup, q);
      gs.modulus_defect = std::max(gs.modulus_defect, std::abs(std::abs(gs.w.values[m]) - std::abs(snap.values[m])));
    }
    gs.grad_phi_sup = std::sqrt(sup) / std::sqrt((r.m0 + 1.0) * log_eps);
    for (int i = 0; i < 3; ++i) gs.grad_w_lp[i] = gradient_lp_norm(grad_w, g, r.exponents[i]);
    gs.grad_u_l2_sq = integrate(g, gradient_norm_squared(grad_u));

    const ComplexGrid ut = pde_rhs(snap);
    double a = 0.0;
    for (std::size_t m = 0; m < g.node_count(); ++m) a += cross(snap.values[m], ut[m]);
    times.push_back(snap.time);
    a_samples.push_back(a / double(g.node_count()));
    r.snapshots.push_back(std::move(gs));
  }
  if (times.size() >= 2)
    r.a_eps = simpson(times, a_samples) / (times.back() - times.front());
  else if (!times.empty())
    r.a_eps = a_samples.front();
  return r;
}

}  // namespace glv

#endif  // GLVORTEX_HODGE_HPP
