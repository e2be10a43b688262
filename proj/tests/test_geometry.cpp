#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "glvortex/geometry.hpp"

using namespace glv;

TEST(TorusDistance, IdentityAndWrap) {
  const auto g = TorusGeometry::cube(2, 1.0, 16);
  const Point x{0.0, 0.0, 0.0}, y{0.9, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(torus_distance(g, x, x), 0.0);
  EXPECT_NEAR(torus_distance(g, x, y), 0.1, 1e-15);
}

TEST(TorusDistance, BruteForceTranslates) {
  const auto g = TorusGeometry::cube(3, 2.0, 8);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (int trial = 0; trial < 200; ++trial) {
    const Point x{u(rng), u(rng), u(rng)}, y{u(rng), u(rng), u(rng)};
    double best = 1e300;
    for (int a = -1; a <= 1; ++a)
      for (int b = -1; b <= 1; ++b)
        for (int c = -1; c <= 1; ++c)
          best = std::min(best, std::hypot(x[0] - y[0] - 2.0 * a, x[1] - y[1] - 2.0 * b, x[2] - y[2] - 2.0 * c));
    EXPECT_NEAR(torus_distance(g, x, y), best, 1e-14);
  }
  EXPECT_NEAR(torus_distance(g, Point{0, 0, 0}, Point{1, 1, 1}), std::sqrt(3.0), 1e-15);
}

TEST(TorusDistance, DimensionMismatchThrows) {
  const auto g = TorusGeometry::cube(3, 1.0, 8);
  const std::vector<double> x{0.1, 0.2}, y{0.1, 0.2, 0.3};
  EXPECT_THROW(torus_distance(g, x, y), InputError);
}

TEST(TorusDistance, TriangleInequality) {
  const auto g = TorusGeometry(3, {1.0, 1.5, 0.8}, {8, 8, 8});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    Point p[3];
    for (auto& q : p) q = {u(rng), 1.5 * u(rng), 0.8 * u(rng)};
    EXPECT_LE(torus_distance(g, p[0], p[2]), torus_distance(g, p[0], p[1]) + torus_distance(g, p[1], p[2]) + 1e-14);
    EXPECT_DOUBLE_EQ(torus_distance(g, p[0], p[1]), torus_distance(g, p[1], p[0]));
  }
}

TEST(Geometry, MetricConstants) {
  const auto g = TorusGeometry(3, {1.0, 2.0, 2.0}, {8, 8, 8});
  EXPECT_DOUBLE_EQ(g.inj(), 0.5);
  EXPECT_DOUBLE_EQ(g.diam(), 0.5 * 3.0);
  EXPECT_DOUBLE_EQ(g.c_star(), 0.5 / 1.5);
  EXPECT_DOUBLE_EQ(g.volume(), 4.0);
  EXPECT_NEAR(g.cell_volume() * double(g.node_count()), 4.0, 1e-14);
  EXPECT_THROW(TorusGeometry(3, {1.0, 1.0, 1.0}, {8, 9, 8}), InputError);
  EXPECT_THROW(TorusGeometry(4, {1.0, 1.0, 1.0}, {8, 8, 8}), InputError);
}

TEST(CapFunction, FiveProperties) {
  const CapFunction& f = default_cap();
  const auto samples = f.tabulate(200001, 1.5);
  double prev = -1.0, sup = 0.0;
  for (const auto& s : samples) {
    if (s.s <= 0.5) EXPECT_NEAR(s.f, s.s, 1e-15);
    if (s.s >= 1.0) EXPECT_DOUBLE_EQ(s.f, 1.0);
    if (s.s <= 1.0) EXPECT_GE(s.f, s.s - 1e-15);
    EXPECT_GE(s.f, prev);
    prev = s.f;
    sup = std::max(sup, std::abs(s.df));
  }
  EXPECT_LT(sup, std::sqrt(2.0));
  EXPECT_NEAR(sup, f.sup_derivative(), 1e-3);
}

TEST(CapFunction, DerivativeMatchesDifferences) {
  const CapFunction& f = default_cap();
  for (double s = 0.01; s < 1.2; s += 0.0137) {
    const double h = 1e-6;
    EXPECT_NEAR(f.derivative(s), (f.value(s + h) - f.value(s - h)) / (2 * h), 1e-6);
  }
}

TEST(DPlus, PaperItems) {
  const auto g = TorusGeometry::cube(3, 1.0, 8);
  const CapFunction& f = default_cap();
  const Point x{0.1, 0.1, 0.1};
  EXPECT_DOUBLE_EQ(d_plus(g, f, x, x), 0.0);
  const Point y{0.1 + 0.2, 0.1, 0.1};  // d = 0.2 < inj/2 = 0.25
  EXPECT_NEAR(d_plus(g, f, x, y), 0.2, 1e-15);
  const Point z{0.6, 0.6, 0.1};  // d = 0.707 > inj
  EXPECT_DOUBLE_EQ(d_plus(g, f, x, z), g.inj());
}

TEST(DPlus, InequalityOnRandomPairs) {
  const auto g = TorusGeometry(3, {1.0, 1.7, 1.2}, {8, 8, 8});
  const CapFunction& f = default_cap();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 5000; ++trial) {
    const Point x{u(rng), 1.7 * u(rng), 1.2 * u(rng)}, y{u(rng), 1.7 * u(rng), 1.2 * u(rng)};
    const double d = torus_distance(g, x, y), dp = d_plus(g, f, x, y);
    EXPECT_LE(g.c_star() * d, dp + 1e-14);
    EXPECT_LE(dp, 2.0 * d + 1e-14);
  }
}

TEST(DPlus, TwoLipschitz) {
  const auto g = TorusGeometry::cube(2, 1.0, 8);
  const CapFunction& f = default_cap();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double h = 1e-5;
  for (int trial = 0; trial < 2000; ++trial) {
    const Point x{u(rng), u(rng), 0.0}, y{u(rng), u(rng), 0.0};
    const Point xh{x[0] + h, x[1], 0.0};
    EXPECT_LE(std::abs(d_plus(g, f, xh, y) - d_plus(g, f, x, y)), 2.0 * h * (1 + 1e-9));
  }
}

TEST(BallMask, TrivialRadii) {
  const auto g = TorusGeometry::cube(2, 1.0, 16);
  EXPECT_TRUE(ball_mask(g, Point{0, 0, 0}, 0.0).empty());
  EXPECT_EQ(ball_mask(g, Point{0, 0, 0}, g.diam() + 1e-9).size(), g.node_count());
  EXPECT_THROW(ball_mask(g, Point{0, 0, 0}, -1.0), InputError);
}

TEST(BallMask, MatchesFullScan) {
  const auto g = TorusGeometry::cube(2, 1.0, 16);
  const Point c{0.0, 0.0, 0.0};
  std::size_t brute = 0;
  for (std::size_t i = 0; i < 16; ++i)
    for (std::size_t j = 0; j < 16; ++j) {
      double dx = i / 16.0, dy = j / 16.0;
      dx = std::min(dx, 1.0 - dx);
      dy = std::min(dy, 1.0 - dy);
      if (std::hypot(dx, dy) < 0.1) ++brute;
    }
  EXPECT_EQ(ball_mask(g, c, 0.1).size(), brute);
  EXPECT_LE(ball_mask(g, c, 0.1).size(), ball_mask(g, c, 0.2).size());
}

TEST(BallMask, AreaConverges) {
  const auto g = TorusGeometry::cube(2, 1.0, 128);
  const double r = g.inj() / 4.0;
  const double area = double(ball_mask(g, Point{0.3, 0.3, 0.0}, r).size()) * g.cell_volume();
  EXPECT_NEAR(area / (unit_ball_volume(2) * r * r), 1.0, 0.05);
}

TEST(UnitBall, KnownValues) {
  EXPECT_NEAR(unit_ball_volume(0), 1.0, 1e-15);
  EXPECT_NEAR(unit_ball_volume(1), 2.0, 1e-15);
  EXPECT_NEAR(unit_ball_volume(2), M_PI, 1e-14);
  EXPECT_NEAR(unit_ball_volume(3), 4.0 * M_PI / 3.0, 1e-14);
}
