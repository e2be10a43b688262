#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <gtest/gtest.h>

#include "glvortex/dynamics.hpp"

using namespace glv;

namespace {

// Classical RK4 for r' = r (1 - r^2) / eps^2 with many small steps.
double scalar_oracle(double r0, double eps, double t) {
  const int n = 200000;
  const double h = t / n;
  auto f = [eps](double r) { return r * (1.0 - r * r) / (eps * eps); };
  double r = r0;
  for (int i = 0; i < n; ++i) {
    const double k1 = f(r), k2 = f(r + 0.5 * h * k1), k3 = f(r + 0.5 * h * k2), k4 = f(r + h * k3);
    r += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return r;
}

}  // namespace

TEST(Step, UnitFieldIsFixed) {
  const auto g = TorusGeometry::cube(3, 1.0, 16);
  ComplexField u(g, 0.1);
  for (auto& v : u.values) v = 1.0;
  IntegratorConfig cfg;
  auto w = step(u, cfg);
  for (const auto& v : w.values) EXPECT_LT(std::abs(v - 1.0), 1e-12);
  EXPECT_NEAR(w.time, cfg.nominal_dt(0.1), 1e-18);
}

TEST(Step, ZeroFieldIsFixed) {
  const auto g = TorusGeometry::cube(2, 1.0, 16);
  ComplexField u(g, 0.1);
  auto w = step(u, IntegratorConfig{});
  for (const auto& v : w.values) EXPECT_EQ(v, cplx(0.0, 0.0));
}

TEST(Step, ScalarOdeOracle) {
  const double eps = 0.1;
  const auto g = TorusGeometry::cube(2, 1.0, 8);
  ComplexField u(g, eps);
  for (auto& v : u.values) v = std::polar(1.1, 0.4);
  IntegratorConfig cfg;
  cfg.t_end = 5.0 * eps * eps;
  const auto traj = evolve(u, cfg);
  double prev = 1.1;
  for (const auto& s : traj.snapshots) {
    const double r = std::abs(s.values[0]);
    const double exact = scalar_oracle(1.1, eps, s.time);
    EXPECT_LT(std::abs(r - exact) / exact, 1e-3);
    EXPECT_LE(r, prev + 1e-15);
    EXPECT_NEAR(std::arg(s.values[3]), 0.4, 1e-12);
    prev = r;
  }
}

TEST(Step, NonFiniteStateThrows) {
  const auto g = TorusGeometry::cube(2, 1.0, 8);
  ComplexField u(g, 0.1);
  u.values[3] = std::nan("");
  try {
    step(u, IntegratorConfig{});
    FAIL() << "expected blow-up";
  } catch (const NumericalBlowup& e) {
    EXPECT_EQ(e.step_index(), 0u);
  }
}

TEST(Evolve, ZeroHorizonGivesInput) {
  const auto g = TorusGeometry::cube(2, 1.0, 8);
  auto u = make_initial(g, 0.1, PhaseWave{{1, 0, 0}});
  const auto traj = evolve(u, IntegratorConfig{});
  ASSERT_EQ(traj.size(), 1u);
  EXPECT_EQ(traj.front().values, u.values);
}

TEST(Evolve, EnergyNonIncreasing) {
  const auto g = TorusGeometry::cube(2, 1.0, 64);
  const double eps = 0.05;
  const auto u = make_initial(g, eps, RandomBudget{2.0, 4});
  IntegratorConfig cfg;
  cfg.t_end = 200 * cfg.nominal_dt(eps);
  const auto traj = evolve(u, cfg);
  const double e0 = traj.energies.front();
  EXPECT_NEAR(e0 / std::abs(std::log(eps)), 2.0, 1e-6);
  for (std::size_t i = 1; i < traj.size(); ++i) EXPECT_LT(traj.energies[i] - traj.energies[i - 1], 1e-8 * e0);
  EXPECT_LT(traj.energies.back(), 0.9 * e0);
}

TEST(Evolve, MaximumPrinciple) {
  const auto g = TorusGeometry::cube(2, 1.0, 64);
  const double eps = 0.05;
  VortexPoints pts{{{{0.3, 0.4}, 1}, {{0.7, 0.6}, -1}}};
  const auto u = make_initial(g, eps, pts);
  ASSERT_LE(u.max_modulus(), 1.0);
  IntegratorConfig cfg;
  cfg.t_end = 0.01;
  cfg.snapshot_stride = 5;
  evolve(u, cfg, [](const ComplexField& f, double, std::size_t) { EXPECT_LE(f.max_modulus(), 1.0 + 1e-6); });
}

TEST(Evolve, PhaseSolvesHeatEquation) {
  const auto g = TorusGeometry::cube(2, 1.0, 64);
  const double eps = 0.05, delta = 1e-3;
  const auto u = make_initial(g, eps, PhaseWave{{0, 0, 0}, delta, {1, 1, 0}});
  IntegratorConfig cfg;
  cfg.t_end = 0.02;
  cfg.snapshot_stride = 20;
  const double k2 = 2.0 * std::pow(2.0 * M_PI, 2);
  evolve(u, cfg, [&](const ComplexField& f, double, std::size_t) {
    // Fourier coefficient of the phase against sin(2 pi (x + y)).
    double c = 0.0, worst_mod = 0.0;
    for (std::size_t n = 0; n < g.node_count(); ++n) {
      const Point x = g.node_position(n);
      c += std::arg(f.values[n]) * std::sin(2 * M_PI * (x[0] + x[1]));
      worst_mod = std::max(worst_mod, std::abs(std::abs(f.values[n]) - 1.0));
    }
    c *= 2.0 / double(g.node_count());
    EXPECT_LT(std::abs(c / (delta * std::exp(-k2 * f.time)) - 1.0), 1e-4) << "t " << f.time;
    EXPECT_LT(worst_mod, 1e-6);
  });
}

TEST(Evolve, StrideKeepsFirstAndLast) {
  const auto g = TorusGeometry::cube(2, 1.0, 16);
  const auto u = make_initial(g, 0.1, PhaseWave{{1, 0, 0}});
  IntegratorConfig cfg;
  cfg.t_end = 0.0215;
  cfg.snapshot_stride = 4;
  const auto traj = evolve(u, cfg);
  const std::size_t steps = cfg.step_count(0.1);
  EXPECT_EQ(traj.size(), 1 + steps / 4 + (steps % 4 ? 1 : 0));
  EXPECT_NEAR(traj.t_end(), 0.0215, 1e-15);
  EXPECT_LE(cfg.dt(0.1), cfg.nominal_dt(0.1));
}

TEST(MakeInitial, PhaseWaveEnergies) {
  const auto g = TorusGeometry::cube(3, 1.0, 16);
  EXPECT_NEAR(total_energy(make_initial(g, 0.1, PhaseWave{})), 0.0, 1e-14);
  for (double eps : {0.1, 0.02})
    EXPECT_NEAR(total_energy(make_initial(g, eps, PhaseWave{{1, 0, 0}})), 2.0 * M_PI * M_PI, 1e-10);
}

TEST(MakeInitial, VortexEnergyMatchesRadialQuadrature) {
  // Energy in a disc around the +1 core against pi int (rho'^2 + rho^2/r^2) r dr + 2 pi int V r dr.
  using boost::math::quadrature::gauss_kronrod;
  const double radius = 0.15;
  for (double eps : {0.1, 0.05, 0.025}) {
    const auto g = TorusGeometry::cube(2, 1.0, 512);
    VortexPoints pts{{{{0.25, 0.5}, 1}, {{0.75, 0.5}, -1}}};
    const auto u = make_initial(g, eps, pts);
    const auto led = energy_density(u);
    double e = 0.0;
    for (std::size_t n : ball_mask(g, Point{0.25, 0.5, 0.0}, radius)) e += led.density[n];
    e *= g.cell_volume();
    auto integrand = [eps](double r) {
      const double q = std::sqrt(r * r + 2 * eps * eps);
      const double rho = r / q, drho = 2 * eps * eps / (q * q * q);
      const double w = 1 - rho * rho;
      return M_PI * (drho * drho + rho * rho / (r * r)) * r + 2 * M_PI * w * w / (4 * eps * eps) * r;
    };
    const double oracle = gauss_kronrod<double, 61>::integrate(integrand, 0.0, radius, 15, 1e-12);
    EXPECT_NEAR(e / oracle, 1.0, 0.05) << "eps " << eps;
  }
}

TEST(MakeInitial, Errors) {
  const auto g3 = TorusGeometry::cube(3, 1.0, 16);
  EXPECT_THROW(make_initial(g3, 0.1, VortexRing{{0.5, 0.5, 0.5}, 0.6, 2}, {true}), GeometryError);
  EXPECT_THROW(make_initial(g3, 0.1, VortexRing{{0.5, 0.5, 0.5}, 0.2, 2}), InputError);  // under-resolved
  const auto g2 = TorusGeometry::cube(2, 1.0, 64);
  EXPECT_THROW(make_initial(g2, 0.05, VortexPoints{{{{0.3, 0.3}, 1}}}), InputError);
  EXPECT_NO_THROW(make_initial(g3, 0.1, VortexRing{{0.5, 0.5, 0.5}, 0.2, 2}, {true}));
}

TEST(MakeInitial, LinesArePeriodic) {
  // Jumps across the periodic seam must look like interior jumps.
  const auto g = TorusGeometry(3, {1.0, 1.3, 0.5}, {64, 64, 32});
  VortexLines spec{{{{0.3, 0.4}, 1}, {{0.7, 0.9}, -1}}, 2};
  const auto u = make_initial(g, 0.05, spec);
  double interior = 0.0, seam = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    interior = std::max(interior, std::abs(u.values[g.index(i, 31, 0)] - u.values[g.index(i, 32, 0)]));
    seam = std::max(seam, std::abs(u.values[g.index(i, 63, 0)] - u.values[g.index(i, 0, 0)]));
    seam = std::max(seam, std::abs(u.values[g.index(63, i, 0)] - u.values[g.index(0, i, 0)]));
  }
  EXPECT_LT(seam, 0.2);
  EXPECT_LT(seam, 2.0 * interior + 0.05);
}
