#ifndef GLVORTEX_GEOMETRY_HPP
#define GLVORTEX_GEOMETRY_HPP

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "glvortex/errors.hpp"

namespace glv {

/// A point of the torus. Only the first `dim` coordinates are meaningful.
using Point = std::array<double, 3>;

/// Flat rectangular torus T^N (N = 2 or 3) carrying a uniform periodic grid.
///
/// Nodes are stored row-major with axis 0 slowest. For N = 2 the third axis
/// has a single node so that all grids share the same three-index layout.
class TorusGeometry {
 public:
  TorusGeometry() = default;

  TorusGeometry(int dim, std::array<double, 3> lengths, std::array<std::size_t, 3> sizes)
      : dim_(dim), lengths_(lengths), sizes_(sizes) {
    if (dim != 2 && dim != 3) throw InputError("torus dimension must be 2 or 3");
    for (int a = 0; a < dim; ++a) {
      if (!(lengths[a] > 0.0)) throw InputError("side lengths must be positive");
      if (sizes[a] < 8 || sizes[a] % 2 != 0)
        throw InputError("grid sizes must be even and at least 8");
    }
    if (dim == 2) {
      lengths_[2] = 1.0;
      sizes_[2] = 1;
    }
  }

  static TorusGeometry cube(int dim, double length, std::size_t n) {
    return TorusGeometry(dim, {length, length, length}, {n, n, n});
  }

  int dim() const noexcept { return dim_; }
  double length(int axis) const noexcept { return lengths_[axis]; }
  std::size_t size(int axis) const noexcept { return sizes_[axis]; }
  double spacing(int axis) const noexcept { return lengths_[axis] / double(sizes_[axis]); }
  const std::array<double, 3>& lengths() const noexcept { return lengths_; }
  const std::array<std::size_t, 3>& sizes() const noexcept { return sizes_; }

  std::size_t node_count() const noexcept { return sizes_[0] * sizes_[1] * sizes_[2]; }

  double max_spacing() const noexcept {
    double h = 0.0;
    for (int a = 0; a < dim_; ++a) h = std::max(h, spacing(a));
    return h;
  }

  /// Quadrature weight of a single node.
  double cell_volume() const noexcept {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= spacing(a);
    return v;
  }

  double volume() const noexcept {
    double v = 1.0;
    for (int a = 0; a < dim_; ++a) v *= lengths_[a];
    return v;
  }

  /// Injectivity radius of the flat torus.
  double inj() const noexcept {
    double m = lengths_[0];
    for (int a = 1; a < dim_; ++a) m = std::min(m, lengths_[a]);
    return 0.5 * m;
  }

  double diam() const noexcept {
    double s = 0.0;
    for (int a = 0; a < dim_; ++a) s += lengths_[a] * lengths_[a];
    return 0.5 * std::sqrt(s);
  }

  double c_star() const noexcept { return inj() / diam(); }

  std::size_t index(std::size_t i, std::size_t j, std::size_t k = 0) const noexcept {
    return (i * sizes_[1] + j) * sizes_[2] + k;
  }

  std::array<std::size_t, 3> unravel(std::size_t idx) const noexcept {
    const std::size_t k = idx % sizes_[2];
    const std::size_t rest = idx / sizes_[2];
    return {rest / sizes_[1], rest % sizes_[1], k};
  }

  Point node_position(std::size_t idx) const noexcept {
    const auto ijk = unravel(idx);
    Point p{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) p[a] = double(ijk[a]) * spacing(a);
    return p;
  }

  /// Nearest-image displacement y - x, componentwise in [-L/2, L/2].
  Point displacement(const Point& x, const Point& y) const noexcept {
    Point d{0.0, 0.0, 0.0};
    for (int a = 0; a < dim_; ++a) {
      double v = y[a] - x[a];
      v -= lengths_[a] * std::round(v / lengths_[a]);
      d[a] = v;
    }
    return d;
  }

  /// Reduces a point into the fundamental cell [0, L_i).
  Point wrap(Point p) const noexcept {
    for (int a = 0; a < dim_; ++a) {
      p[a] -= lengths_[a] * std::floor(p[a] / lengths_[a]);
      if (p[a] >= lengths_[a]) p[a] -= lengths_[a];
    }
    for (int a = dim_; a < 3; ++a) p[a] = 0.0;
    return p;
  }

  bool operator==(const TorusGeometry& o) const noexcept {
    return dim_ == o.dim_ && lengths_ == o.lengths_ && sizes_ == o.sizes_;
  }

 private:
  int dim_ = 3;
  std::array<double, 3> lengths_{1.0, 1.0, 1.0};
  std::array<std::size_t, 3> sizes_{8, 8, 8};
};

inline void require_point(const TorusGeometry& geom, std::span<const double> p) {
  if (p.size() != std::size_t(geom.dim()))
    throw InputError("point has " + std::to_string(p.size()) + " coordinates, torus has dimension " +
                     std::to_string(geom.dim()));
}

inline Point make_point(const TorusGeometry& geom, std::span<const double> p) {
  require_point(geom, p);
  Point q{0.0, 0.0, 0.0};
  std::copy(p.begin(), p.end(), q.begin());
  return q;
}

/// Periodic (geodesic) distance on the flat torus.
inline double torus_distance(const TorusGeometry& geom, const Point& x, const Point& y) noexcept {
  const Point d = geom.displacement(x, y);
  return std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
}

inline double torus_distance(const TorusGeometry& geom, std::span<const double> x,
                             std::span<const double> y) {
  return torus_distance(geom, make_point(geom, x), make_point(geom, y));
}

namespace detail {

// exp(-1/x) for x > 0, zero otherwise.
inline double flat_bump(double x) noexcept { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; }

// C-infinity step from 0 (x <= 0) to 1 (x >= 1), flat to all orders at both ends.
inline double smooth_step(double x) noexcept {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double a = flat_bump(x);
  const double b = flat_bump(1.0 - x);
  return a / (a + b);
}

inline double smooth_step_derivative(double x) noexcept {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double a = flat_bump(x);
  const double b = flat_bump(1.0 - x);
  const double da = a / (x * x);
  const double db = -b / ((1.0 - x) * (1.0 - x));
  return (da * b - a * db) / ((a + b) * (a + b));
}

}  // namespace detail

/// Cap profile f used by the capped distance d+ = inj * f(d / inj).
///
/// f' = 1 on [0, 1/2]. On [1/2, 1], with sigma = 2(s - 1/2), f' rises smoothly to
/// 1 + a on [0, sigma0] and falls smoothly to 0 on [sigma0, 1], where a = 1 - sigma0
/// makes the area exactly 1/2 so that f(1) = 1. All transitions are C-infinity.
/// Values of f on [1/2, 1] come from a Gauss-Legendre table and cubic Hermite
/// interpolation against the exact f'.
class CapFunction {
 public:
  explicit CapFunction(double sigma0 = 0.75, std::size_t table_intervals = 4096)
      : sigma0_(sigma0), rise_(1.0 - sigma0), intervals_(table_intervals) {
    if (!(sigma0 > 0.0 && sigma0 < 1.0)) throw InputError("cap plateau fraction must lie in (0,1)");
    table_.resize(intervals_ + 1);
    table_[0] = 0.5;
    const double ds = 0.5 / double(intervals_);
    for (std::size_t i = 0; i < intervals_; ++i) {
      const double a = 0.5 + ds * double(i);
      const double piece = boost::math::quadrature::gauss<double, 30>::integrate(
          [this](double s) { return derivative(s); }, a, a + ds);
      table_[i + 1] = table_[i] + piece;
    }
    // Rescales the increments so that f(1) = 1 holds to the last bit while
    // the table stays monotone.
    const double scale = 0.5 / (table_.back() - 0.5);
    for (std::size_t i = 1; i <= intervals_; ++i)
      table_[i] = std::clamp(0.5 + (table_[i] - 0.5) * scale, table_[i - 1], 1.0);
    table_.back() = 1.0;
  }

  double plateau_fraction() const noexcept { return sigma0_; }

  double value(double s) const noexcept {
    if (s <= 0.5) return std::max(s, 0.0);
    if (s >= 1.0) return 1.0;
    const double ds = 0.5 / double(intervals_);
    const double pos = (s - 0.5) / ds;
    std::size_t i = std::min<std::size_t>(std::size_t(pos), intervals_ - 1);
    const double t = pos - double(i);
    const double s0 = 0.5 + ds * double(i);
    const double f0 = table_[i], f1 = table_[i + 1];
    const double m0 = derivative(s0) * ds, m1 = derivative(s0 + ds) * ds;
    const double t2 = t * t, t3 = t2 * t;
    // Written as f0 + increment so rounding cannot break monotonicity near s = 1.
    const double v = f0 + ((-2 * t3 + 3 * t2) * (f1 - f0) + (t3 - 2 * t2 + t) * m0 + (t3 - t2) * m1);
    return std::clamp(v, f0, f1);
  }

  double derivative(double s) const noexcept {
    if (s < 0.0) return 0.0;
    if (s <= 0.5) return 1.0;
    if (s >= 1.0) return 0.0;
    const double sigma = 2.0 * (s - 0.5);
    if (sigma <= sigma0_) return 1.0 + rise_ * detail::smooth_step(sigma / sigma0_);
    return (1.0 + rise_) * (1.0 - detail::smooth_step((sigma - sigma0_) / (1.0 - sigma0_)));
  }

  double second_derivative(double s) const noexcept {
    if (s <= 0.5 || s >= 1.0) return 0.0;
    const double sigma = 2.0 * (s - 0.5);
    if (sigma <= sigma0_) return 2.0 * rise_ * detail::smooth_step_derivative(sigma / sigma0_) / sigma0_;
    return -2.0 * (1.0 + rise_) * detail::smooth_step_derivative((sigma - sigma0_) / (1.0 - sigma0_)) /
           (1.0 - sigma0_);
  }

  /// Exact supremum of f', attained at sigma = sigma0.
  double sup_derivative() const noexcept { return 1.0 + rise_; }

  /// max(1, sup|f'|^2), the constant of the weighted-energy comparison.
  double comparison_constant() const noexcept { return std::max(1.0, sup_derivative() * sup_derivative()); }

  struct Sample {
    double s, f, df;
  };

  /// Uniform samples of (f, f') on [0, s_max].
  std::vector<Sample> tabulate(std::size_t count, double s_max = 1.5) const {
    std::vector<Sample> out(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double s = s_max * double(i) / double(count - 1);
      out[i] = {s, value(s), derivative(s)};
    }
    return out;
  }

 private:
  double sigma0_;
  double rise_;
  std::size_t intervals_;
  std::vector<double> table_;
};

/// Process-wide default cap profile.
inline const CapFunction& default_cap() {
  static const CapFunction cap;
  return cap;
}

/// Capped distance computed from an already known torus distance.
inline double d_plus_from_distance(const TorusGeometry& geom, const CapFunction& cap, double d) noexcept {
  const double inj = geom.inj();
  const double dp = inj * cap.value(d / inj);
  assert(dp >= geom.c_star() * d * (1.0 - 1e-12) - 1e-15);
  assert(dp <= 2.0 * d + 1e-15);
  return dp;
}

inline double d_plus(const TorusGeometry& geom, const CapFunction& cap, const Point& x, const Point& y) noexcept {
  return d_plus_from_distance(geom, cap, torus_distance(geom, x, y));
}

inline double d_plus(const TorusGeometry& geom, const CapFunction& cap, std::span<const double> x,
                     std::span<const double> y) {
  return d_plus(geom, cap, make_point(geom, x), make_point(geom, y));
}

/// Indices of all grid nodes strictly closer than `radius` to `center`.
inline std::vector<std::size_t> ball_mask(const TorusGeometry& geom, const Point& center, double radius) {
  if (radius < 0.0) throw InputError("ball radius must be non-negative");
  std::vector<std::size_t> out;
  const std::size_t n = geom.node_count();
  for (std::size_t idx = 0; idx < n; ++idx)
    if (torus_distance(geom, geom.node_position(idx), center) < radius) out.push_back(idx);
  return out;
}

/// Volume of the Euclidean unit ball in R^m.
inline double unit_ball_volume(int m) noexcept {
  return std::pow(M_PI, 0.5 * m) / std::tgamma(0.5 * m + 1.0);
}

/// Grid of distances from every node to `center`.
inline std::vector<double> distance_grid(const TorusGeometry& geom, const Point& center) {
  std::vector<double> d(geom.node_count());
  for (std::size_t idx = 0; idx < d.size(); ++idx) d[idx] = torus_distance(geom, geom.node_position(idx), center);
  return d;
}

}  // namespace glv

#endif  // GLVORTEX_GEOMETRY_HPP
