#ifndef GLVORTEX_QUADRATURE_HPP
#define GLVORTEX_QUADRATURE_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "glvortex/errors.hpp"

namespace glv {

inline double trapezoid(std::span<const double> x, std::span<const double> f) {
  if (x.size() != f.size()) throw InputError("quadrature abscissae and samples differ in length");
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) s += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

/// Composite Simpson rule on (possibly non-uniform) abscissae. An odd trailing
/// interval is closed with the quadratic through the last three samples.
inline double simpson(std::span<const double> x, std::span<const double> f) {
  if (x.size() != f.size()) throw InputError("quadrature abscissae and samples differ in length");
  const std::size_t n = x.size();
  if (n < 3) return trapezoid(x, f);
  double s = 0.0;
  std::size_t i = 0;
  for (; i + 2 < n; i += 2) {
    const double h0 = x[i + 1] - x[i], h1 = x[i + 2] - x[i + 1];
    s += (h0 + h1) / 6.0 *
         ((2.0 - h1 / h0) * f[i] + (h0 + h1) * (h0 + h1) / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
  }
  if (i + 1 < n) {
    const double h0 = x[n - 2] - x[n - 3], h1 = x[n - 1] - x[n - 2];
    s += -h1 * h1 * h1 / (6.0 * h0 * (h0 + h1)) * f[n - 3] + (h1 * h1 / (6.0 * h0) + 0.5 * h1) * f[n - 2] +
         (h1 * h1 / 3.0 + 0.5 * h0 * h1) / (h0 + h1) * f[n - 1];
  }
  return s;
}

/// Running Simpson integral: out[i] = integral of f from x[0] to x[i].
/// Even indices use composite Simpson, odd ones add the one-interval quadratic.
inline std::vector<double> cumulative_simpson(std::span<const double> x, std::span<const double> f) {
  std::vector<double> out(x.size(), 0.0);
  for (std::size_t i = 1; i < x.size(); ++i) out[i] = simpson(x.first(i + 1), f.first(i + 1));
  return out;
}

}  // namespace glv

#endif  // GLVORTEX_QUADRATURE_HPP
