#ifndef GLVORTEX_KERNEL_HPP
#define GLVORTEX_KERNEL_HPP

#include <cmath>
#include <vector>

#include "glvortex/geometry.hpp"
#include "glvortex/spectral.hpp"

namespace glv {

/// K(x, tau; y) = (4 pi tau)^{-N/2} exp(-d+(x,y)^2 / (4 tau)) on the grid.
struct KernelEval {
  Point center{0.0, 0.0, 0.0};
  double tau = 0.0;
  RealGrid values;
  RealGrid d_plus;  // capped distance to the centre, per node
};

inline double kernel_peak(int dim, double tau) { return std::pow(4.0 * M_PI * tau, -0.5 * dim); }

inline KernelEval kernel(const TorusGeometry& geom, const CapFunction& cap, const Point& y, double tau) {
  if (!(tau > 0.0)) throw DomainError("kernel time must be positive");
  KernelEval k;
  k.center = y;
  k.tau = tau;
  k.values.resize(geom.node_count());
  k.d_plus.resize(geom.node_count());
  const double peak = kernel_peak(geom.dim(), tau);
  for (std::size_t m = 0; m < k.values.size(); ++m) {
    const double dp = d_plus_from_distance(geom, cap, torus_distance(geom, geom.node_position(m), y));
    k.d_plus[m] = dp;
    k.values[m] = peak * std::exp(-dp * dp / (4.0 * tau));
  }
  return k;
}

/// Spectral derivatives of a kernel grid plus the exact tau-derivative.
struct KernelDerivatives {
  std::vector<RealGrid> gradient;             // [a]
  std::vector<std::vector<RealGrid>> hessian;  // [a][b]
  RealGrid laplacian;
  RealGrid dtau;
};

inline KernelDerivatives kernel_derivatives(const TorusGeometry& geom, const KernelEval& k) {
  KernelDerivatives d;
  const ComplexGrid spec = forward_transform(geom, to_complex(k.values));
  const int n = geom.dim();
  for (int a = 0; a < n; ++a) d.gradient.push_back(real_part(derivative_from_spectrum(geom, spec, a)));
  d.hessian.assign(n, std::vector<RealGrid>(n));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      d.hessian[a][b] = real_part(second_derivative_from_spectrum(geom, spec, a, b));
      if (b != a) d.hessian[b][a] = d.hessian[a][b];
    }
  d.laplacian.assign(geom.node_count(), 0.0);
  for (int a = 0; a < n; ++a)
    for (std::size_t m = 0; m < d.laplacian.size(); ++m) d.laplacian[m] += d.hessian[a][a][m];
  d.dtau.resize(geom.node_count());
  for (std::size_t m = 0; m < d.dtau.size(); ++m) {
    const double dp2 = k.d_plus[m] * k.d_plus[m];
    d.dtau[m] = k.values[m] * (-0.5 * n / k.tau + dp2 / (4.0 * k.tau * k.tau));
  }
  return d;
}

/// Radial bounds of the heat-operator defect outside the flat ball.
///
/// With r = d+^2 / 2 one has dK/dtau - Laplacian K = K [(Lap r - N)/(2 tau) + (r - |grad r|^2/2)/(2 tau^2)],
/// which vanishes where d+ = d. A1 and A2 bound the two brackets for d >= inj/2.
struct HeatDefectBound {
  double a1 = 0.0;
  double a2 = 0.0;

  /// Bound on |dK/dtau - Laplacian K| at any node with d >= inj/2.
  double pointwise(const TorusGeometry& geom, double tau) const {
    const double kmax = kernel_peak(geom.dim(), tau) * std::exp(-geom.inj() * geom.inj() / (16.0 * tau));
    return kmax * (a1 / (2.0 * tau) + a2 / (2.0 * tau * tau));
  }
};

inline HeatDefectBound heat_defect_bound(const TorusGeometry& geom, const CapFunction& cap, std::size_t samples = 20001) {
  const double inj = geom.inj();
  const int n = geom.dim();
  HeatDefectBound b;
  for (std::size_t i = 0; i < samples; ++i) {
    const double s = 0.5 + 0.5 * double(i) / double(samples - 1);  // d / inj in [1/2, 1]
    const double d = s * inj;
    const double f = cap.value(s), fp = cap.derivative(s), fpp = cap.second_derivative(s);
    const double r = 0.5 * inj * inj * f * f;
    const double dr = inj * f * fp;            // dr/dd
    const double d2r = fp * fp + f * fpp;      // d^2 r / dd^2
    const double lap = d2r + double(n - 1) * dr / d;
    b.a1 = std::max(b.a1, std::abs(lap - n));
    b.a2 = std::max(b.a2, std::abs(r - 0.5 * dr * dr));
  }
  // Beyond inj the capped distance is constant: Lap r = 0, grad r = 0, r = inj^2/2.
  b.a1 = std::max(b.a1, double(n));
  b.a2 = std::max(b.a2, 0.5 * inj * inj);
  return b;
}

}  // namespace glv

#endif  // GLVORTEX_KERNEL_HPP
