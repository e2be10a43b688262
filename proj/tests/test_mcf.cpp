#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "glvortex/dynamics.hpp"
#include "glvortex/mcf.hpp"

using namespace glv;

namespace {

const VortexLines kCheckerboard{{{{0.25, 0.25}, 1}, {{0.75, 0.25}, -1}, {{0.25, 0.75}, -1}, {{0.75, 0.75}, 1}}, 2};

double max_of(const RealGrid& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST(Trace, ZeroField) {
  const auto g = TorusGeometry::cube(3, 1.0, 8);
  ComplexField u(g, 0.1);
  // both sides reduce to N V
  EXPECT_LT(trace_identity_check(u), 1e-12 * max_of(potential_density(u)));
}

TEST(Trace, RandomFieldsAcrossEpsilon) {
  for (int dim : {2, 3}) {
    const auto g = TorusGeometry::cube(dim, 1.0, dim == 2 ? 64 : 24);
    for (double eps : {0.2, 0.1, 0.05}) {
      const auto u = make_initial(g, eps, RandomBudget{1.0, 7, 3}, {.allow_underresolved = true});
      const double scale = max_of(energy_density(u).density);
      EXPECT_LT(trace_identity_check(u), 1e-12 * scale) << dim << " " << eps;
      EXPECT_EQ(stress_field(u).asymmetry(), 0.0);
    }
  }
}

TEST(Stress, UniformField) {
  const auto g = TorusGeometry::cube(2, 1.0, 16);
  ComplexField u(g, 0.1);
  for (auto& v : u.values) v = 1.0;
  std::vector<RealGrid> X(2, RealGrid(g.node_count()));
  for (std::size_t n = 0; n < g.node_count(); ++n) X[0][n] = std::sin(2 * M_PI * g.node_position(n)[1]);
  const auto r = stress_identity_check(u, X);
  EXPECT_EQ(r.lhs, 0.0);
  EXPECT_EQ(r.rhs, 0.0);
}

TEST(Stress, ConstantFieldGivesVanishingMomentum) {
  const auto g = TorusGeometry::cube(2, 1.0, 128);
  const auto u = make_initial(g, 0.05, PhaseWave{{1, 0, 0}, 0.3, {0, 1, 0}});
  std::vector<RealGrid> X(2, RealGrid(g.node_count(), 1.0));
  const auto r = stress_identity_check(u, X);
  EXPECT_EQ(r.lhs, 0.0);
  // momentum scale: int |u_t| |grad u|
  const auto grad = spectral_gradient(u);
  const auto ut = pde_rhs(u);
  RealGrid m(g.node_count());
  for (std::size_t n = 0; n < m.size(); ++n) m[n] = std::abs(ut[n]) * std::sqrt(std::norm(grad[0][n]) + std::norm(grad[1][n]));
  EXPECT_LT(std::abs(r.rhs), 1e-8 * integrate(g, m));
}

TEST(Stress, FourierModePhaseWave) {
  for (std::size_t n : {32, 128}) {
    const auto g = TorusGeometry::cube(2, 1.0, n);
    const auto u = make_initial(g, 0.05, PhaseWave{{1, 0, 0}, 0.3, {1, 1, 0}}, {.allow_underresolved = true});
    std::vector<RealGrid> X(2, RealGrid(g.node_count()));
    for (std::size_t m = 0; m < g.node_count(); ++m) {
      const Point x = g.node_position(m);
      X[0][m] = std::sin(2 * M_PI * (x[0] + x[1]));
      X[1][m] = std::sin(4 * M_PI * (x[0] + x[1]));
    }
    const auto r = stress_identity_check(u, X);
    EXPECT_GT(std::abs(r.rhs), 1e-3);
    EXPECT_LT(r.rel_err, 1e-2);
  }
}

TEST(Stress, RandomDataConvergesUnderRefinement) {
  std::vector<double> errs;
  for (std::size_t n : {32, 64, 128}) {
    const auto g = TorusGeometry::cube(2, 1.0, n);
    const auto u = make_initial(g, 0.05, RandomBudget{1.0, 3, 3}, {.allow_underresolved = true});
    std::vector<RealGrid> X(2, RealGrid(g.node_count()));
    for (std::size_t m = 0; m < g.node_count(); ++m) {
      const Point x = g.node_position(m);
      X[0][m] = std::cos(2 * M_PI * (x[0] - x[1]));
      X[1][m] = std::sin(2 * M_PI * x[0]);
    }
    errs.push_back(stress_identity_check(u, X).rel_err);
  }
  EXPECT_LT(errs.back(), 1e-2);
  EXPECT_LT(errs[2], errs[0]);
}

TEST(Curvature, CircleSamples) {
  const double r = 0.3;
  for (double h : {0.05, 0.2, 0.7}) {
    const Point a{r * std::cos(-h), r * std::sin(-h), 0.1}, b{r, 0.0, 0.1}, c{r * std::cos(h), r * std::sin(h), 0.1};
    const Point H = detail::circumscribed_curvature(a, b, c);
    EXPECT_NEAR(H[0], -1.0 / r, 1e-10);
    EXPECT_NEAR(H[1], 0.0, 1e-10);
    EXPECT_NEAR(H[2], 0.0, 1e-12);
  }
  const Point z = detail::circumscribed_curvature({0, 0, 0}, {1, 1, 1}, {2, 2, 2});
  EXPECT_EQ(detail::norm3(z), 0.0);
}

TEST(Curvature, PlantedRing) {
  const auto g = TorusGeometry::cube(3, 1.0, 64);
  const double r0 = 0.25;
  const auto u = make_initial(g, 0.035, VortexRing{{0.5, 0.5, 0.5}, r0, 2});
  const auto vs = extract_vortex_set(u);
  ASSERT_EQ(vs.filaments.size(), 1u);
  const auto geo = filament_geometry(g, vs.filaments[0], resample_spacing(g));
  EXPECT_TRUE(geo.closed_loop);
  for (std::size_t k = 0; k < geo.points.size(); ++k) {
    EXPECT_NEAR(detail::norm3(geo.curvature[k]), 1.0 / r0, 0.05 / r0);
    EXPECT_LT(std::abs(detail::dot3(geo.curvature[k], geo.tangent[k])), 0.05 / r0);
  }
}

class ShrinkingRing : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    const auto g = TorusGeometry::cube(3, 1.0, 48);
    IntegratorConfig cfg;
    cfg.t_end = 0.03;
    cfg.snapshot_stride = 2;
    traj_ = new Trajectory(evolve(make_initial(g, 0.045, VortexRing{{0.5, 0.5, 0.5}, 0.3, 2}), cfg));
  }
  static void TearDownTestSuite() { delete traj_; }
  static Trajectory* traj_;
};
Trajectory* ShrinkingRing::traj_ = nullptr;

TEST_F(ShrinkingRing, TrackAndCollapse) {
  const auto tr = ring_mcf_compare(*traj_, 0.3);
  ASSERT_GT(tr.times.size(), 5u);
  const double h = traj_->front().geom.spacing(0);
  EXPECT_NEAR(tr.radii.front(), 0.3, h);
  for (std::size_t i = 1; i < tr.radii.size(); ++i) EXPECT_LT(tr.radii[i], tr.radii[i - 1]);
  for (std::size_t i = 0; i < tr.radii.size(); ++i) EXPECT_NEAR(tr.lengths[i], 2 * M_PI * tr.radii[i], 0.05 * 2 * M_PI * tr.radii[i]);
  EXPECT_GE(tr.radii.back(), 4 * 0.045);
  EXPECT_TRUE(tr.collapsed());
  EXPECT_LT(tr.collapse_time(), 0.03);
  EXPECT_NO_THROW(tr.to_json().dump());
}

TEST_F(ShrinkingRing, BrakkeCurvatureTerm) {
  const auto tr = ring_mcf_compare(*traj_, 0.3);
  Trajectory window;
  for (const auto& s : traj_->snapshots)
    if (s.time <= tr.window_end + 1e-12) window.push(s, 0.0);
  const RealGrid one(traj_->front().geom.node_count(), 1.0);
  const auto rep = brakke_diagnostic(window, one, 0.1, 2 * 0.045 * 0.045);
  ASSERT_FALSE(rep.samples.empty());
  for (const auto& s : rep.samples) {
    // circle: B(nu, 1) = -nu(1) / r^2
    const auto it = std::find(tr.times.begin(), tr.times.end(), s.time);
    ASSERT_NE(it, tr.times.end());
    const double r = tr.radii[std::size_t(it - tr.times.begin())];
    EXPECT_NEAR(s.b(), -s.nu_one / (r * r), 0.05 * s.nu_one / (r * r));
    EXPECT_EQ(s.tangential_term, 0.0);
  }
}

TEST(Brakke, StationaryLines) {
  const auto g = TorusGeometry::cube(3, 1.0, 48);
  IntegratorConfig cfg;
  cfg.t_end = 0.02;
  cfg.snapshot_stride = 4;
  const auto traj = evolve(make_initial(g, 0.05, kCheckerboard), cfg);
  const RealGrid one(g.node_count(), 1.0);
  const auto rep = brakke_diagnostic(traj, one, 0.1, 2 * 0.05 * 0.05);
  ASSERT_GT(rep.samples.size(), 3u);
  for (const auto& s : rep.samples) {
    EXPECT_EQ(s.curvature_term, 0.0);
    EXPECT_LT(std::abs(s.defect()), 0.05 * s.nu);
  }
  EXPECT_TRUE(rep.consistent());

  // test function vanishing (to round-off) near every line
  RealGrid chi(g.node_count());
  for (std::size_t n = 0; n < chi.size(); ++n) {
    const Point x = g.node_position(n);
    const double d = std::min({torus_distance(g, x, {0.25, 0.25, x[2]}), torus_distance(g, x, {0.75, 0.25, x[2]}),
                               torus_distance(g, x, {0.25, 0.75, x[2]}), torus_distance(g, x, {0.75, 0.75, x[2]})});
    chi[n] = 1e-300 + std::exp(-1.0 / std::max(d - 0.2, 1e-3));
  }
  const auto far = brakke_diagnostic(traj, chi, 0.1, 2 * 0.05 * 0.05);
  for (const auto& s : far.samples) {
    EXPECT_LT(s.nu, 1e-100);
    EXPECT_LT(std::abs(s.b()), 1e-100);
  }
}

TEST(Brakke, Errors) {
  const auto g = TorusGeometry::cube(3, 1.0, 16);
  Trajectory t;
  ComplexField u(g, 0.1);
  for (auto& v : u.values) v = 1.0;
  t.push(u, 0.0);
  u.time = 0.1;
  t.push(u, 0.0);
  EXPECT_THROW(brakke_diagnostic(t, RealGrid(g.node_count(), 1.0)), TrackingError);
  EXPECT_THROW(brakke_diagnostic(t, RealGrid(g.node_count(), 0.0)), InputError);
  EXPECT_THROW(ring_mcf_compare(t, 0.3), TrackingError);
}
