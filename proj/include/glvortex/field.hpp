#ifndef GLVORTEX_FIELD_HPP
#define GLVORTEX_FIELD_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "glvortex/geometry.hpp"
#include "glvortex/spectral.hpp"

namespace glv {

/// Snapshot of a complex order parameter u on the torus grid.
struct ComplexField {
  TorusGeometry geom;
  ComplexGrid values;
  double epsilon = 0.1;
  double time = 0.0;

  ComplexField() = default;
  ComplexField(TorusGeometry g, double eps, double t = 0.0)
      : geom(std::move(g)), values(geom.node_count(), cplx(0.0, 0.0)), epsilon(eps), time(t) {}
  ComplexField(TorusGeometry g, ComplexGrid v, double eps, double t)
      : geom(std::move(g)), values(std::move(v)), epsilon(eps), time(t) {
    validate();
  }

  void validate() const {
    if (values.size() != geom.node_count()) throw InputError("field grid does not match torus grid");
    if (!(epsilon > 0.0)) throw InputError("epsilon must be positive");
  }

  double max_modulus() const noexcept {
    double m = 0.0;
    for (const cplx& v : values) m = std::max(m, std::abs(v));
    return m;
  }
};

/// Real 1-form sum_i w_i dx^i stored as one grid per axis.
struct OneForm {
  TorusGeometry geom;
  std::vector<RealGrid> components;
  double time = 0.0;

  OneForm() = default;
  explicit OneForm(const TorusGeometry& g, double t = 0.0)
      : geom(g), components(std::size_t(g.dim()), RealGrid(g.node_count(), 0.0)), time(t) {}
};

/// Real 2-form with canonical components (i<j) in the order (0,1), (0,2), (1,2).
struct TwoForm {
  TorusGeometry geom;
  std::vector<RealGrid> components;
  double time = 0.0;

  TwoForm() = default;
  explicit TwoForm(const TorusGeometry& g, double t = 0.0)
      : geom(g), components(pair_count(g.dim()), RealGrid(g.node_count(), 0.0)), time(t) {}

  static std::size_t pair_count(int dim) noexcept { return std::size_t(dim * (dim - 1) / 2); }

  /// Slot of component (i,j) with i<j.
  static std::size_t pair_index(int i, int j) noexcept {
    if (i == 0) return std::size_t(j - 1);
    return 2;  // (1,2)
  }

  /// Value of the antisymmetric component w_ij at a node, any i != j.
  double at(int i, int j, std::size_t node) const noexcept {
    if (i == j) return 0.0;
    if (i < j) return components[pair_index(i, j)][node];
    return -components[pair_index(j, i)][node];
  }
};

/// u x v = Re(u) Im(v) - Im(u) Re(v).
inline double cross(const cplx& u, const cplx& v) noexcept { return u.real() * v.imag() - u.imag() * v.real(); }

/// u . v = Re(u) Re(v) + Im(u) Im(v).
inline double dot(const cplx& u, const cplx& v) noexcept { return u.real() * v.real() + u.imag() * v.imag(); }

/// Per-axis spectral derivatives of u.
inline std::vector<ComplexGrid> spectral_gradient(const TorusGeometry& geom, std::span<const cplx> values) {
  const ComplexGrid spec = forward_transform(geom, ComplexGrid(values.begin(), values.end()));
  std::vector<ComplexGrid> grad;
  for (int a = 0; a < geom.dim(); ++a) grad.push_back(derivative_from_spectrum(geom, spec, a));
  return grad;
}

inline std::vector<ComplexGrid> spectral_gradient(const ComplexField& field) {
  field.validate();
  return spectral_gradient(field.geom, field.values);
}

inline OneForm current_from_gradient(const ComplexField& field, const std::vector<ComplexGrid>& grad) {
  OneForm j(field.geom, field.time);
  for (int a = 0; a < field.geom.dim(); ++a)
    for (std::size_t n = 0; n < field.values.size(); ++n) j.components[a][n] = cross(field.values[n], grad[a][n]);
  return j;
}

/// Supercurrent ju = u x du.
inline OneForm current(const ComplexField& field) { return current_from_gradient(field, spectral_gradient(field)); }

inline TwoForm jacobian_from_gradient(const ComplexField& field, const std::vector<ComplexGrid>& grad) {
  const int n = field.geom.dim();
  TwoForm jac(field.geom, field.time);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      auto& c = jac.components[TwoForm::pair_index(i, j)];
      for (std::size_t m = 0; m < field.values.size(); ++m) c[m] = cross(grad[i][m], grad[j][m]);
    }
  return jac;
}

/// Jacobian 2-form Ju = sum_{i<j} (d_i u x d_j u) dx^i ^ dx^j = (1/2) d(ju).
inline TwoForm jacobian(const ComplexField& field) { return jacobian_from_gradient(field, spectral_gradient(field)); }

/// Exterior derivative of a scalar: the 1-form d(phi).
inline OneForm exterior_derivative(const TorusGeometry& geom, std::span<const double> scalar, double time = 0.0) {
  OneForm out(geom, time);
  out.components = real_gradient(geom, scalar);
  return out;
}

/// Exterior derivative (dw)_ij = d_i w_j - d_j w_i.
inline TwoForm exterior_derivative(const OneForm& form) {
  const TorusGeometry& g = form.geom;
  const int n = g.dim();
  std::vector<ComplexGrid> spec;
  for (int a = 0; a < n; ++a) spec.push_back(forward_transform(g, to_complex(form.components[a])));
  TwoForm out(g, form.time);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const RealGrid dij = real_part(derivative_from_spectrum(g, spec[j], i));
      const RealGrid dji = real_part(derivative_from_spectrum(g, spec[i], j));
      auto& c = out.components[TwoForm::pair_index(i, j)];
      for (std::size_t m = 0; m < c.size(); ++m) c[m] = dij[m] - dji[m];
    }
  return out;
}

/// Codifferential of a 2-form, (d*psi)_i = sum_j d_j psi_ij.
inline OneForm codifferential(const TwoForm& form) {
  const TorusGeometry& g = form.geom;
  const int n = g.dim();
  OneForm out(g, form.time);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double sign = (i < j) ? 1.0 : -1.0;
      const RealGrid& c = form.components[TwoForm::pair_index(std::min(i, j), std::max(i, j))];
      const RealGrid dj = real_part(derivative_from_spectrum(g, forward_transform(g, to_complex(c)), j));
      for (std::size_t m = 0; m < dj.size(); ++m) out.components[i][m] += sign * dj[m];
    }
  return out;
}

/// L2 inner product of two 1-forms.
inline double inner(const OneForm& a, const OneForm& b) {
  double s = 0.0;
  for (std::size_t c = 0; c < a.components.size(); ++c)
    for (std::size_t m = 0; m < a.components[c].size(); ++m) s += a.components[c][m] * b.components[c][m];
  return s * a.geom.cell_volume();
}

inline double l2_norm(const OneForm& a) { return std::sqrt(inner(a, a)); }

inline double max_abs(const OneForm& a) {
  double m = 0.0;
  for (const auto& c : a.components)
    for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs(const TwoForm& a) {
  double m = 0.0;
  for (const auto& c : a.components)
    for (double v : c) m = std::max(m, std::abs(v));
  return m;
}

inline OneForm operator-(OneForm a, const OneForm& b) {
  for (std::size_t c = 0; c < a.components.size(); ++c)
    for (std::size_t m = 0; m < a.components[c].size(); ++m) a.components[c][m] -= b.components[c][m];
  return a;
}

inline OneForm operator+(OneForm a, const OneForm& b) {
  for (std::size_t c = 0; c < a.components.size(); ++c)
    for (std::size_t m = 0; m < a.components[c].size(); ++m) a.components[c][m] += b.components[c][m];
  return a;
}

/// Nodewise |grad u|^2 = sum_i |d_i u|^2.
inline RealGrid gradient_norm_squared(const std::vector<ComplexGrid>& grad) {
  RealGrid out(grad.front().size(), 0.0);
  for (const auto& g : grad)
    for (std::size_t m = 0; m < out.size(); ++m) out[m] += std::norm(g[m]);
  return out;
}

}  // namespace glv

#endif  // GLVORTEX_FIELD_HPP
