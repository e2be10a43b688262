#include <cmath>

#include <gtest/gtest.h>

#include "glvortex/dynamics.hpp"
#include "glvortex/vortex.hpp"

using namespace glv;

TEST(Extraction, UniformFieldIsEmpty) {
  for (int dim : {2, 3}) {
    const auto g = TorusGeometry::cube(dim, 1.0, 16);
    ComplexField u(g, 0.1);
    for (auto& v : u.values) v = 1.0;
    EXPECT_TRUE(extract_vortex_set(u).empty());
  }
}

TEST(Extraction, PlanarPair) {
  const auto g = TorusGeometry::cube(2, 1.0, 128);
  const auto u = make_initial(g, 0.03, VortexPoints{{{{0.3, 0.4}, 1}, {{0.71, 0.62}, -1}}});
  const auto vs = extract_vortex_set(u);
  ASSERT_EQ(vs.points.size(), 2u);
  EXPECT_EQ(vs.total_degree(), 0);
  // sum of degrees against the integrated Jacobian, which vanishes on a closed torus
  const auto J = jacobian(u);
  EXPECT_NEAR(integrate(g, J.components[0]) / (2 * M_PI), double(vs.total_degree()), 1e-6);
  for (const auto& p : vs.points) {
    const Point planted = p.degree > 0 ? Point{0.3, 0.4, 0} : Point{0.71, 0.62, 0};
    EXPECT_LT(torus_distance(g, p.position, planted), g.spacing(0));
    EXPECT_LT(std::abs(sample_field(u, p.position)), 0.5);
  }
}

TEST(Extraction, PlantedRing) {
  const auto g = TorusGeometry::cube(3, 1.0, 64);
  const double r0 = 0.25;
  const Point c{0.5, 0.5, 0.5};
  const auto u = make_initial(g, 0.035, VortexRing{c, r0, 2});
  const auto vs = extract_vortex_set(u);
  ASSERT_EQ(vs.filaments.size(), 1u);
  const auto& f = vs.filaments.front();
  EXPECT_EQ(f.wraps, (std::array<int, 3>{0, 0, 0}));
  double mean = 0.0;
  for (const auto& x : f.vertices) {
    const Point d = g.displacement(x, c);
    mean += std::abs(std::hypot(std::hypot(d[0], d[1]) - r0, d[2]));
  }
  mean /= double(f.vertices.size());
  EXPECT_LT(mean, g.spacing(0));
  EXPECT_NEAR(f.length(g), 2 * M_PI * r0, 0.05 * 2 * M_PI * r0);
  EXPECT_EQ(std::abs(f.degree), 1);
}

TEST(Extraction, PlantedLines) {
  const auto g = TorusGeometry(3, {1.0, 1.0, 1.0}, {48, 48, 24});
  const auto u = make_initial(g, 0.05, VortexLines{{{{0.25, 0.5}, 1}, {{0.75, 0.5}, -1}}, 2},
                              {.allow_underresolved = true});
  const auto vs = extract_vortex_set(u);
  ASSERT_EQ(vs.filaments.size(), 2u);
  for (const auto& f : vs.filaments) {
    EXPECT_EQ(f.wraps, (std::array<int, 3>{0, 0, 1}));
    const double x0 = f.degree > 0 ? 0.25 : 0.75;
    for (const auto& x : f.vertices) {
      EXPECT_NEAR(x[0], x0, g.spacing(0));
      EXPECT_NEAR(x[1], 0.5, g.spacing(1));
    }
    EXPECT_NEAR(f.length(g), 1.0, 1e-6);
  }
  EXPECT_NE(vs.filaments[0].degree, vs.filaments[1].degree);
}

TEST(Density, UniformAndRange) {
  const auto g = TorusGeometry::cube(3, 1.0, 32);
  ComplexField u(g, 0.1);
  for (auto& v : u.values) v = 1.0;
  const std::vector<double> radii{0.05, 0.1, 0.2};
  const auto d = density_scan(energy_density(u), {0.5, 0.5, 0.5}, radii);
  for (double t : d.theta) EXPECT_EQ(t, 0.0);
  for (double t : d.theta_parabolic) EXPECT_EQ(t, 0.0);
  EXPECT_THROW(density_scan(energy_density(u), {0, 0, 0}, std::vector<double>{0.01}), RangeError);
  EXPECT_THROW(density_scan(energy_density(u), {0, 0, 0}, std::vector<double>{0.6}), RangeError);
}

TEST(Density, ParabolicMatchesWeightedEnergy) {
  const auto g = TorusGeometry::cube(3, 1.0, 48);
  const auto u = make_initial(g, 0.05, VortexLines{{{{0.25, 0.5}, 1}, {{0.75, 0.5}, -1}}, 2});
  Trajectory traj;
  traj.push(u, total_energy(u));
  ComplexField later = u;
  later.time = 1.0;
  traj.push(later, total_energy(u));
  const Point x{0.25, 0.5, 0.3};
  const std::vector<double> radii{0.05, 0.1};
  const auto d = density_scan(energy_density(u), x, radii);
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    const double we = weighted_energy(traj, {x, r * r}, r) / log_scale(0.05);
    EXPECT_NEAR(d.theta_parabolic[i], we, 1e-12 * we);
  }
  EXPECT_GT(d.theta_lower, 0.0);
  EXPECT_LE(d.theta_lower, d.theta_upper);
}

TEST(Density, FarFieldDecaysDownLadder) {
  const auto g = TorusGeometry::cube(3, 1.0, 48);
  const std::vector<double> radii{0.0625};
  std::vector<double> theta;
  for (double eps : {0.1, 0.05}) {
    const auto u = make_initial(g, eps, VortexLines{{{{0.25, 0.5}, 1}, {{0.75, 0.5}, -1}}, 2});
    theta.push_back(density_scan(energy_density(u), {0.5, 0.125, 0.5}, radii).theta[0]);
  }
  EXPECT_LT(theta[1], theta[0]);
}

TEST(ClearingOut, WaveLadder) {
  ClearingOutConfig cfg;
  cfg.dim = 2;
  cfg.grid = 128;
  cfg.spec = PhaseWave{{1, 0, 0}};
  cfg.ladder = {0.05, 0.025};
  cfg.t_end = 0.05;
  cfg.dt_factor = 0.2;
  const auto rep = clearing_out_experiment(cfg);
  ASSERT_FALSE(rep.samples.empty());
  double prev_max = std::numeric_limits<double>::infinity();
  for (double eps : cfg.ladder) {
    double mx = 0.0;
    for (const auto& s : rep.samples)
      if (s.epsilon == eps) {
        mx = std::max(mx, s.weighted);
        // relaxed wave modulus
        EXPECT_NEAR(s.defect, 1.0 - std::sqrt(1.0 - 4 * M_PI * M_PI * eps * eps), 2e-3);
      }
    EXPECT_LT(mx, prev_max);
    prev_max = mx;
  }
  for (double e : rep.eta_hat) EXPECT_TRUE(std::isinf(e));
  cfg.sigmas = {1.5};
  EXPECT_THROW(clearing_out_experiment(cfg), InputError);
  cfg.sigmas = {0.1};
  cfg.ladder = {0.05, 0.1};
  EXPECT_THROW(clearing_out_experiment(cfg), InputError);
}
