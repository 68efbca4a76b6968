#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "projection_cases.hpp"
#include "sublift/projections.hpp"

using namespace sublift;
using namespace sublift::cases;

TEST(BallL2, Examples) {
  EXPECT_EQ(proj_ball_l2(Eigen::Vector2d(0.1, 0.2), 1.0), Eigen::Vector2d(0.1, 0.2));
  EXPECT_TRUE(proj_ball_l2(Eigen::Vector2d(3, 4), 1.0).isApprox(Eigen::Vector2d(0.6, 0.8), 1e-15));
  EXPECT_EQ(proj_ball_l2(Eigen::Vector2d(0, 0), 0.0), Eigen::Vector2d(0, 0));
}

TEST(BallLinf, Examples) {
  EXPECT_EQ(proj_ball_linf(Eigen::Vector2d(0.5, -0.5), 1.0), Eigen::Vector2d(0.5, -0.5));
  EXPECT_EQ(proj_ball_linf(Eigen::Vector2d(3, -4), 1.0), Eigen::Vector2d(1, -1));
  EXPECT_EQ(proj_ball_linf(Eigen::Vector2d(3, -4), 0.0), Eigen::Vector2d(0, 0));
}

TEST(ProjK, Examples) {
  const LabelSpace ls({0, 1, 2});
  const Eigen::MatrixXd Z = Eigen::MatrixXd::Zero(2, 2);
  EXPECT_EQ(proj_K(Z, ls, RegularizerKind::Isotropic), Z);
  Eigen::MatrixXd P(2, 2);
  P << 3, 4, 0.1, 0.2;
  Eigen::MatrixXd expect(2, 2);
  expect << 0.6, 0.8, 0.1, 0.2;
  EXPECT_TRUE(proj_K(P, ls, RegularizerKind::Isotropic).isApprox(expect, 1e-15));
  EXPECT_THROW(proj_K(Eigen::MatrixXd::Zero(3, 2), ls, RegularizerKind::Isotropic), ArgumentError);
}

TEST(Parabola, Examples) {
  EXPECT_EQ(proj_parabola_epigraph<double>({1, 1}, 1.0), Eigen::Vector2d(1, 1));
  EXPECT_TRUE(proj_parabola_epigraph<double>({0, -1}, 1.0).isApprox(Eigen::Vector2d(0, 0)));
  const Eigen::Vector2d p = proj_parabola_epigraph<double>({2, 0}, 1.0);
  EXPECT_NEAR(p[0], 0.8351, 1e-3);
  EXPECT_NEAR(p[1], 0.6974, 1e-3);
}

TEST(Parabola, MatchesDenseSearch) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-3, 3), A(0.2, 3);
  for (int t = 0; t < 100; ++t) {
    const double a = A(rng);
    Eigen::Vector2d x(U(rng), U(rng));
    if (x[1] >= a * x[0] * x[0]) x[1] = a * x[0] * x[0] - 1.0;
    double best = 1e300, bx = 0;
    for (int j = 0; j <= 600000; ++j) {
      const double s = -3.5 + 7.0 * j / 600000.0;
      const double d = (s - x[0]) * (s - x[0]) + (a * s * s - x[1]) * (a * s * s - x[1]);
      if (d < best) best = d, bx = s;
    }
    const Eigen::Vector2d p = proj_parabola_epigraph<double>(x, a);
    EXPECT_NEAR(p[0], bx, 1e-3);
    EXPECT_NEAR(p[1], a * bx * bx, 1e-3);
  }
}

TEST(Parabola, MatchesLongBisection) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> U(-5.0, 5.0), A(0.05, 20.0);
  for (int trial = 0; trial < 2000; ++trial) {
    const double a = A(rng);
    const Eigen::Vector2d p(U(rng), U(rng) - 5.0);
    if (p[1] >= a * p[0] * p[0] || p[0] == 0.0) continue;
    long double lo = std::min(0.0, p[0]), hi = std::max(0.0, p[0]);
    for (int it = 0; it < 200; ++it) {
      const long double mid = (lo + hi) / 2;
      const long double g = 2.0L * a * a * mid * mid * mid + (1.0L - 2.0L * a * p[1]) * mid - p[0];
      (g < 0 ? lo : hi) = mid;
    }
    const auto q = proj_parabola_epigraph<double>(p, a);
    EXPECT_NEAR(q[0], static_cast<double>(lo), 1e-12 * (1.0 + std::abs(p[0])));
  }
}

TEST(PolylineEpigraph, Examples) {
  const PolyLinePiece p = polyline_piece({0, 1}, {0, 0});
  EXPECT_EQ(proj_polyline_conjugate_epigraph(p, {-1, 1}), Eigen::Vector2d(-1, 1));
  EXPECT_TRUE(proj_polyline_conjugate_epigraph(p, {-2, -1}).isApprox(Eigen::Vector2d(-2, 0)));
  EXPECT_TRUE(proj_polyline_conjugate_epigraph(p, {2, 0}).isApprox(Eigen::Vector2d(1, 1)));
  // Dense search over the boundary z = max(0, t).
  double best = 1e300;
  Eigen::Vector2d arg;
  for (int j = 0; j <= 400000; ++j) {
    const double t = -2 + 6.0 * j / 400000.0;
    const Eigen::Vector2d b(t, std::max(0.0, t));
    if ((b - Eigen::Vector2d(2, 0)).squaredNorm() < best) best = (b - Eigen::Vector2d(2, 0)).squaredNorm(), arg = b;
  }
  EXPECT_NEAR(arg[0], 1.0, 1e-4);
  EXPECT_NEAR(arg[1], 1.0, 1e-4);
}

TEST(MonotoneBox, Examples) {
  EXPECT_EQ(proj_monotone_box(Eigen::Vector2d(0.7, 0.3)), Eigen::Vector2d(0.7, 0.3));
  EXPECT_EQ(proj_monotone_box(Eigen::Vector2d(0.2, 0.8)), Eigen::Vector2d(0.5, 0.5));
  EXPECT_EQ(proj_monotone_box(Eigen::Vector2d(1.5, -0.2)), Eigen::Vector2d(1, 0));
}

TEST(MonotoneBox, MatchesBruteForceProjection) {
  // Minimize the distance over a fine grid of feasible chains in R^3.
  std::mt19937_64 rng(12);
  for (int t = 0; t < 30; ++t) {
    const Eigen::Vector3d x = normal_vec(rng, 3, 0.8) + Eigen::Vector3d::Constant(0.5);
    double best = 1e300;
    const int n = 100;
    for (int a = 0; a <= n; ++a)
      for (int b = 0; b <= a; ++b)
        for (int c = 0; c <= b; ++c) best = std::min(best, (Eigen::Vector3d(a, b, c) / n - x).squaredNorm());
    const Eigen::Vector3d p = proj_monotone_box(x);
    EXPECT_LE((p - x).squaredNorm(), best + 1e-12);
    EXPECT_NEAR((p - x).squaredNorm(), best, 2e-2);
  }
}

TEST(ProjectionProperties, AllProjections) {
  for (const Case& c : all_cases()) {
    SCOPED_TRACE(c.name);
    std::mt19937_64 rng(2024);
    double idem = 0, feas = 0, expand = 0, vi = -1e300;
    for (int t = 0; t < 10000; ++t) {
      const Eigen::VectorXd x = c.input(rng), y = c.input(rng);
      const Eigen::VectorXd px = c.proj(x), py = c.proj(y);
      idem = std::max(idem, (c.proj(px) - px).lpNorm<Eigen::Infinity>());
      feas = std::max(feas, c.violation(px));
      expand = std::max(expand, (px - py).norm() - (x - y).norm());
      const Eigen::VectorXd f = c.feasible_point(rng);
      vi = std::max(vi, (x - px).dot(f - px));
    }
    EXPECT_LE(idem, 1e-12);
    EXPECT_LE(feas, 1e-10);
    EXPECT_LE(expand, 1e-10);
    EXPECT_LE(vi, 1e-8);
  }
}

TEST(ScaledEpigraph, ProjectsOntoScaledSet) {
  // {(v, z): z / w >= rho^*(v / w)} = w * epi(rho^*).
  const ConvexPiece p = polyline_piece({0, 0.3, 1}, {0.2, 0.0, 0.5});
  const double w = 0.37;
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Vector2d x = normal_vec(rng, 2, 2.0);
    const Eigen::Vector2d q = proj_scaled_conjugate_epigraph(p, x, w);
    EXPECT_GE(q[1] / w, conjugate_eval(p, q[0] / w) - 1e-10);
    EXPECT_TRUE(proj_scaled_conjugate_epigraph(p, q, w).isApprox(q, 1e-12));
  }
}
