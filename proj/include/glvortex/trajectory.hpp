#ifndef GLVORTEX_TRAJECTORY_HPP
#define GLVORTEX_TRAJECTORY_HPP

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "glvortex/errors.hpp"
#include "glvortex/field.hpp"

namespace glv {

/// Time-ordered snapshots of one simulation with their total energies.
struct Trajectory {
  std::vector<ComplexField> snapshots;
  std::vector<double> energies;

  std::size_t size() const noexcept { return snapshots.size(); }
  bool empty() const noexcept { return snapshots.empty(); }
  const ComplexField& front() const { return snapshots.front(); }
  const ComplexField& back() const { return snapshots.back(); }
  double t_begin() const { return snapshots.front().time; }
  double t_end() const { return snapshots.back().time; }

  std::vector<double> times() const {
    std::vector<double> t;
    for (const auto& s : snapshots) t.push_back(s.time);
    return t;
  }

  void push(ComplexField f, double energy) {
    if (!snapshots.empty() && !(f.time > snapshots.back().time))
      throw InputError("trajectory snapshots must have increasing times");
    snapshots.push_back(std::move(f));
    energies.push_back(energy);
  }

  /// Interval [i, i+1] containing t and the weight of snapshot i+1.
  std::pair<std::size_t, double> bracket(double t) const {
    if (snapshots.empty()) throw RangeError("empty trajectory");
    const double tol = 1e-12 * std::max(1.0, std::abs(t_end()));
    if (t < t_begin() - tol || t > t_end() + tol) throw RangeError("time outside the trajectory window");
    if (snapshots.size() == 1) return {0, 0.0};
    auto it = std::upper_bound(snapshots.begin(), snapshots.end(), t,
                               [](double v, const ComplexField& s) { return v < s.time; });
    std::size_t hi = std::size_t(it - snapshots.begin());
    hi = std::clamp<std::size_t>(hi, 1, snapshots.size() - 1);
    const std::size_t lo = hi - 1;
    const double w = (t - snapshots[lo].time) / (snapshots[hi].time - snapshots[lo].time);
    return {lo, std::clamp(w, 0.0, 1.0)};
  }

  /// Field at time t by linear interpolation of u between neighbouring snapshots.
  ComplexField at(double t) const {
    const auto [lo, w] = bracket(t);
    const ComplexField& a = snapshots[lo];
    if (w == 0.0) return a;
    const ComplexField& b = snapshots[lo + 1];
    if (w == 1.0) return b;
    ComplexField out(a.geom, a.epsilon, t);
    for (std::size_t m = 0; m < out.values.size(); ++m) out.values[m] = (1.0 - w) * a.values[m] + w * b.values[m];
    return out;
  }
};

}  // namespace glv

#endif  // GLVORTEX_TRAJECTORY_HPP
