#ifndef GLVORTEX_SPECTRAL_HPP
#define GLVORTEX_SPECTRAL_HPP

#include <array>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include <fftw3.h>

#include "glvortex/geometry.hpp"

namespace glv {

using cplx = std::complex<double>;
using RealGrid = std::vector<double>;
using ComplexGrid = std::vector<cplx>;

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

inline int& fftw_thread_count() {
  static int n = 1;
  return n;
}

}  // namespace detail

/// Caps the number of threads FFTW may use for plans created afterwards.
inline void set_fft_threads(int threads) {
  std::lock_guard lock(detail::fftw_planner_mutex());
  static const bool initialised = fftw_init_threads() != 0;
  (void)initialised;
  detail::fftw_thread_count() = std::max(1, threads);
  fftw_plan_with_nthreads(detail::fftw_thread_count());
}

/// In-place complex FFT pair for one grid shape. Plans are built with
/// FFTW_ESTIMATE so transforms are bitwise reproducible run to run.
class FftPlan {
 public:
  explicit FftPlan(const TorusGeometry& geom) : count_(geom.node_count()) {
    std::array<int, 3> n{int(geom.size(0)), int(geom.size(1)), int(geom.size(2))};
    const int rank = geom.dim();
    fftw_complex* scratch = fftw_alloc_complex(count_);
    std::lock_guard lock(detail::fftw_planner_mutex());
    forward_ = fftw_plan_dft(rank, n.data(), scratch, scratch, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    backward_ = fftw_plan_dft(rank, n.data(), scratch, scratch, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(scratch);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  ~FftPlan() {
    std::lock_guard lock(detail::fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  void forward(std::span<cplx> data) const {
    fftw_execute_dft(forward_, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
  }

  /// Inverse transform including the 1/n normalisation.
  void backward(std::span<cplx> data) const {
    fftw_execute_dft(backward_, reinterpret_cast<fftw_complex*>(data.data()),
                     reinterpret_cast<fftw_complex*>(data.data()));
    const double scale = 1.0 / double(count_);
    for (auto& v : data) v *= scale;
  }

 private:
  std::size_t count_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

inline const FftPlan& fft_plan(const TorusGeometry& geom) {
  static std::mutex cache_mutex;
  static std::map<std::array<std::size_t, 4>, std::unique_ptr<FftPlan>> cache;
  const std::array<std::size_t, 4> key{std::size_t(geom.dim()), geom.size(0), geom.size(1), geom.size(2)};
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<FftPlan>(geom);
  return *slot;
}

/// Wavenumbers of a periodic grid.
///
/// `derivative` holds the multipliers used for first derivatives, where the
/// Nyquist mode is zeroed so that derivatives of real data stay real.
/// `squared` holds k^2 including the Nyquist mode, used for Laplacians.
struct KSpace {
  std::array<std::vector<double>, 3> derivative;
  std::array<std::vector<double>, 3> squared;
  std::array<double, 3> k_max{0.0, 0.0, 0.0};

  explicit KSpace(const TorusGeometry& geom) {
    for (int a = 0; a < 3; ++a) {
      const std::size_t n = geom.size(a);
      derivative[a].assign(n, 0.0);
      squared[a].assign(n, 0.0);
      if (a >= geom.dim()) continue;
      const double base = 2.0 * M_PI / geom.length(a);
      for (std::size_t j = 0; j < n; ++j) {
        const long m = (j <= n / 2) ? long(j) : long(j) - long(n);
        const double k = base * double(m);
        squared[a][j] = k * k;
        derivative[a][j] = (2 * j == n) ? 0.0 : k;
      }
      k_max[a] = base * double(n / 2);
    }
  }

  template <class F>
  void for_each(const TorusGeometry& geom, F&& f) const {
    std::size_t idx = 0;
    for (std::size_t i = 0; i < geom.size(0); ++i)
      for (std::size_t j = 0; j < geom.size(1); ++j)
        for (std::size_t k = 0; k < geom.size(2); ++k, ++idx) f(idx, i, j, k);
  }

  double k2(std::size_t i, std::size_t j, std::size_t k) const noexcept {
    return squared[0][i] + squared[1][j] + squared[2][k];
  }

  double kd(int axis, std::size_t i, std::size_t j, std::size_t k) const noexcept {
    const std::array<std::size_t, 3> ijk{i, j, k};
    return derivative[axis][ijk[axis]];
  }
};

inline const KSpace& kspace(const TorusGeometry& geom) {
  static std::mutex cache_mutex;
  static std::map<std::array<double, 7>, std::unique_ptr<KSpace>> cache;
  const std::array<double, 7> key{double(geom.dim()),   double(geom.size(0)), double(geom.size(1)),
                                  double(geom.size(2)), geom.length(0),       geom.length(1),
                                  geom.length(2)};
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[key];
  if (!slot) slot = std::make_unique<KSpace>(geom);
  return *slot;
}

inline ComplexGrid to_complex(std::span<const double> g) { return ComplexGrid(g.begin(), g.end()); }

inline RealGrid real_part(std::span<const cplx> g) {
  RealGrid out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = g[i].real();
  return out;
}

inline ComplexGrid forward_transform(const TorusGeometry& geom, ComplexGrid data) {
  fft_plan(geom).forward(data);
  return data;
}

/// Derivative along `axis` of a field given by its spectrum.
inline ComplexGrid derivative_from_spectrum(const TorusGeometry& geom, std::span<const cplx> spectrum, int axis) {
  const KSpace& ks = kspace(geom);
  ComplexGrid out(spectrum.size());
  ks.for_each(geom, [&](std::size_t idx, std::size_t i, std::size_t j, std::size_t k) {
    out[idx] = cplx(0.0, ks.kd(axis, i, j, k)) * spectrum[idx];
  });
  fft_plan(geom).backward(out);
  return out;
}

/// Second derivative d^2/dx_a dx_b from a spectrum. Diagonal entries keep the
/// Nyquist mode (consistent with the Laplacian), mixed entries drop it.
inline ComplexGrid second_derivative_from_spectrum(const TorusGeometry& geom, std::span<const cplx> spectrum,
                                                   int a, int b) {
  const KSpace& ks = kspace(geom);
  ComplexGrid out(spectrum.size());
  ks.for_each(geom, [&](std::size_t idx, std::size_t i, std::size_t j, std::size_t k) {
    const std::array<std::size_t, 3> ijk{i, j, k};
    const double m = (a == b) ? -ks.squared[a][ijk[a]] : -ks.derivative[a][ijk[a]] * ks.derivative[b][ijk[b]];
    out[idx] = m * spectrum[idx];
  });
  fft_plan(geom).backward(out);
  return out;
}

inline ComplexGrid laplacian_from_spectrum(const TorusGeometry& geom, std::span<const cplx> spectrum) {
  const KSpace& ks = kspace(geom);
  ComplexGrid out(spectrum.size());
  ks.for_each(geom, [&](std::size_t idx, std::size_t i, std::size_t j, std::size_t k) {
    out[idx] = -ks.k2(i, j, k) * spectrum[idx];
  });
  fft_plan(geom).backward(out);
  return out;
}

inline ComplexGrid laplacian(const TorusGeometry& geom, std::span<const cplx> g) {
  return laplacian_from_spectrum(geom, forward_transform(geom, ComplexGrid(g.begin(), g.end())));
}

inline RealGrid laplacian(const TorusGeometry& geom, std::span<const double> g) {
  return real_part(laplacian_from_spectrum(geom, forward_transform(geom, to_complex(g))));
}

/// Spectral gradient of a real scalar grid (one grid per torus axis).
inline std::vector<RealGrid> real_gradient(const TorusGeometry& geom, std::span<const double> g) {
  const ComplexGrid spec = forward_transform(geom, to_complex(g));
  std::vector<RealGrid> out;
  for (int a = 0; a < geom.dim(); ++a) out.push_back(real_part(derivative_from_spectrum(geom, spec, a)));
  return out;
}

/// Spectral Hessian of a real scalar grid, indexed [a][b].
inline std::vector<std::vector<RealGrid>> real_hessian(const TorusGeometry& geom, std::span<const double> g) {
  const ComplexGrid spec = forward_transform(geom, to_complex(g));
  const int n = geom.dim();
  std::vector<std::vector<RealGrid>> h(n, std::vector<RealGrid>(n));
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b) {
      h[a][b] = real_part(second_derivative_from_spectrum(geom, spec, a, b));
      if (b != a) h[b][a] = h[a][b];
    }
  return h;
}

/// Applies the exact heat semigroup exp(t * Laplacian) in place.
inline void heat_flow(const TorusGeometry& geom, std::span<cplx> g, double t) {
  const KSpace& ks = kspace(geom);
  const FftPlan& plan = fft_plan(geom);
  plan.forward(g);
  ks.for_each(geom, [&](std::size_t idx, std::size_t i, std::size_t j, std::size_t k) {
    g[idx] *= std::exp(-ks.k2(i, j, k) * t);
  });
  plan.backward(g);
}

/// Zeroes every Fourier mode with |k_a| > (2/3) k_max along some axis.
inline void two_thirds_filter(const TorusGeometry& geom, std::span<cplx> g) {
  const KSpace& ks = kspace(geom);
  const FftPlan& plan = fft_plan(geom);
  plan.forward(g);
  ks.for_each(geom, [&](std::size_t idx, std::size_t i, std::size_t j, std::size_t k) {
    const std::array<std::size_t, 3> ijk{i, j, k};
    for (int a = 0; a < geom.dim(); ++a)
      if (std::sqrt(ks.squared[a][ijk[a]]) > (2.0 / 3.0) * ks.k_max[a]) {
        g[idx] = 0.0;
        return;
      }
  });
  plan.backward(g);
}

/// Grid quadrature of a real grid.
inline double integrate(const TorusGeometry& geom, std::span<const double> g) {
  double s = 0.0;
  for (double v : g) s += v;
  return s * geom.cell_volume();
}

}  // namespace glv

#endif  // GLVORTEX_SPECTRAL_HPP
