#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "sublift/lifting.hpp"
#include "sublift/oracles.hpp"
#include "sublift/pieces.hpp"

using namespace sublift;

namespace {

std::vector<ConvexPiece> affine_pieces(const LabelSpace& ls, const std::vector<double>& costs) {
  std::vector<ConvexPiece> pieces;
  for (Index i = 0; i < ls.num_intervals(); ++i)
    pieces.push_back(polyline_piece({ls.lower(i), ls.upper(i)}, {costs[i], costs[i + 1]}));
  return pieces;
}

double max_grid_step(const LabelSpace& ls, std::span<const ConvexPiece> pieces) {
  double h = 0.0;
  for (Index i = 0; i < ls.num_intervals(); ++i) h = std::max(h, envelope_grid_step(ls, pieces, i));
  return h;
}

}  // namespace

TEST(BruteConjugate, SquareAtOne) {
  const auto sf = SampledFunction::tabulate([](double g) { return g * g; }, 0.0, 1.0, 1e-3);
  EXPECT_NEAR(sf.step(), 1e-3, 1e-12);
  EXPECT_NEAR(brute_conjugate(sf, 1.0), 0.25, 1e-3);
}

TEST(BruteConjugate, ZeroSlopeIsNegatedMinimum) {
  const auto sf = SampledFunction::tabulate([](double g) { return std::cos(3 * g) + 2; }, -1.0, 2.0, 1e-2);
  double mn = sf.values.front();
  for (double v : sf.values) mn = std::min(mn, v);
  EXPECT_DOUBLE_EQ(brute_conjugate(sf, 0.0), -mn);
}

TEST(BruteConjugate, AffineAttainsZeroEverywhere) {
  const auto sf = SampledFunction::tabulate([](double g) { return 2 * g; }, 0.0, 1.0, 0.05);
  EXPECT_NEAR(brute_conjugate(sf, 2.0), 0.0, 1e-15);
  for (std::size_t j = 0; j < sf.gammas.size(); ++j) EXPECT_NEAR(2 * sf.gammas[j] - sf.values[j], 0.0, 1e-15);
}

TEST(BruteConjugate, FirstOrderConvergence) {
  // |gamma - 1/3| has conjugate t / 3 on [-1, 1]; the kink sits between samples.
  const auto fn = [](double g) { return std::abs(g - 1.0 / 3.0); };
  double prev = 0.0;
  for (int level = 0; level < 5; ++level) {
    const double h = 0.1 / std::pow(2.0, level);
    const auto sf = SampledFunction::tabulate(fn, 0.0, 1.0, h);
    double dev = 0.0;
    for (double t = -1.0; t <= 1.0; t += 0.125) dev = std::max(dev, std::abs(brute_conjugate(sf, t) - t / 3.0));
    if (level > 0 && prev > 1e-12) EXPECT_LE(dev, prev / 2.0 + 1e-12) << "h=" << h;
    EXPECT_LE(dev, h);
    prev = dev;
  }
}

TEST(BruteConjugate, ExactConjugateOfSquareWithinStep) {
  for (double h : {1e-2, 1e-3}) {
    const auto sf = SampledFunction::tabulate([](double g) { return g * g; }, 0.0, 1.0, h);
    for (double t = 0.0; t <= 2.0; t += 0.1) EXPECT_NEAR(brute_conjugate(sf, t), t * t / 4.0, h);
  }
}

TEST(LiftedEnvelope, SingleConvexIntervalMatchesPiece) {
  const LabelSpace ls({0, 1});
  const std::vector<ConvexPiece> pieces{quadratic_piece(1.0, -0.6, 0.09, 0.0, 1.0)};
  const double h = envelope_grid_step(ls, pieces, 0);
  for (double u : {0.0, 0.2, 0.3, 0.75, 1.0}) {
    const Eigen::VectorXd uv = Eigen::VectorXd::Constant(1, u);
    EXPECT_NEAR(brute_lifted_envelope(ls, pieces, uv), (u - 0.3) * (u - 0.3), h * (1 + u)) << "u=" << u;
  }
}

TEST(LiftedEnvelope, AffinePiecesGiveLinearForm) {
  const LabelSpace ls({0, 1, 2});
  const auto pieces = affine_pieces(ls, {0, 1, 4});
  const Eigen::Vector2d u(1.0, 0.5);
  EXPECT_NEAR(brute_lifted_envelope(ls, pieces, u), 2.5, 2 * max_grid_step(ls, pieces) * u.lpNorm<1>());
}

TEST(LiftedEnvelope, TightOnTheLiftedGraph) {
  const LabelSpace ls({0, 0.4, 1.0, 1.5});
  const auto rho = [](double g) { return (g - 0.7) * (g - 0.7); };
  std::vector<ConvexPiece> pieces;
  for (Index i = 0; i < ls.num_intervals(); ++i)
    pieces.push_back(quadratic_piece(1.0, -1.4, 0.49, ls.lower(i), ls.upper(i)));
  const double h = max_grid_step(ls, pieces);
  for (double g : {0.0, 0.2, 0.55, 0.7, 1.2, 1.5}) {
    const Eigen::VectorXd u = lift(ls, g);
    EXPECT_NEAR(brute_lifted_envelope(ls, pieces, u), rho(g), 2 * h * u.lpNorm<1>() + 1e-9) << "gamma=" << g;
  }
}

TEST(LiftedEnvelope, RejectsMoreThanThreeIntervals) {
  const auto ls = LabelSpace::uniform(0, 1, 5);
  const auto pieces = affine_pieces(ls, {0, 1, 0, 1, 0});
  EXPECT_THROW(brute_lifted_envelope(ls, pieces, Eigen::VectorXd::Zero(4)), UnsupportedError);
}

TEST(CheckProp3, CornersAndRandomTrials) {
  const LabelSpace ls({0, 1, 2});
  const auto pieces = affine_pieces(ls, {0, 1, 4});
  EXPECT_NEAR(brute_lifted_envelope(ls, pieces, Eigen::Vector2d(0, 0)), 0.0, 1e-9);
  EXPECT_NEAR(brute_lifted_envelope(ls, pieces, Eigen::Vector2d(1, 1)), 4.0,
              2 * max_grid_step(ls, pieces) * 2.0);
  const auto rep = check_prop3(ls, {0, 1, 4}, 100, 3);
  EXPECT_EQ(rep.trials, 100);
  EXPECT_TRUE(rep.passed()) << rep.max_deviation;
  EXPECT_LE(rep.worst_ratio, 1.0);
}

TEST(CheckProp3, ThreeIntervalsNonconvexCosts) {
  const LabelSpace ls({0, 0.5, 1.5, 2});
  const auto rep = check_prop3(ls, {1, 0, 2, 0.5}, 30, 5, EnvelopeSearch{101, 60});
  EXPECT_TRUE(rep.passed()) << rep.max_deviation;
}

TEST(CheckProp4, BinaryCaseExamples) {
  const LabelSpace ls({0, 1});
  const ConvexPiece piece = quadratic_piece(1.0, -0.6, 0.09, 0.0, 1.0);
  const std::vector<ConvexPiece> pieces{piece};
  const double h = envelope_grid_step(ls, pieces, 0);
  EXPECT_NEAR(brute_lifted_envelope(ls, pieces, Eigen::VectorXd::Constant(1, 0.3)), 0.0, 1.3 * h);
  EXPECT_NEAR(brute_lifted_envelope(ls, pieces, Eigen::VectorXd::Constant(1, 0.0)), 0.09, h);
  const auto rep = check_prop4(ls, piece, 100, 7);
  EXPECT_TRUE(rep.passed()) << rep.max_deviation;
}

TEST(CheckProp4, ConvexifiedTwoMinimaAndAffine) {
  const LabelSpace ls({-1, 1});
  std::vector<double> gs, vs;
  for (int j = 0; j <= 40; ++j) {
    const double g = -1.0 + j / 20.0;
    gs.push_back(g);
    vs.push_back(std::min((g + 0.6) * (g + 0.6), 0.2 + (g - 0.5) * (g - 0.5)));
  }
  EXPECT_TRUE(check_prop4(ls, convexify_interval(gs, vs), 100, 9).passed());
  EXPECT_TRUE(check_prop4(ls, polyline_piece({-1, 1}, {2, -1}), 100, 11).passed());
}

TEST(CheckKEquivalence, ZeroMatrixHasFullSlack) {
  const LabelSpace ls({0, 0.5, 1.5, 1.75, 3});
  const auto rep = check_K_equivalence(Eigen::MatrixXd::Zero(4, 2), ls, 1000, 1);
  EXPECT_EQ(rep.samples, 1000);
  EXPECT_EQ(rep.violations, 0);
  EXPECT_GE(rep.worst_margin, 0.0);
  EXPECT_TRUE(rep.witness_failures.empty());
}

TEST(CheckKEquivalence, WitnessCatchesEveryInflatedRow) {
  const LabelSpace ls({0, 0.5, 1.5, 1.75, 3});
  for (auto kind : {RegularizerKind::Isotropic, RegularizerKind::Anisotropic}) {
    for (Index row = 0; row < ls.num_intervals(); ++row) {
      Eigen::MatrixXd P = Eigen::MatrixXd::Zero(4, 2);
      const double w = ls.width(row) * 1.01;
      if (kind == RegularizerKind::Isotropic) P.row(row) << w * 0.6, w * 0.8;
      else P.row(row) << w, -w;
      const auto rep = check_K_equivalence(P, ls, 100, 2, kind);
      ASSERT_EQ(rep.witness_failures.size(), 1u);
      EXPECT_EQ(rep.witness_failures.front(), row);
    }
  }
}

TEST(CheckKEquivalence, ProjectedMatricesSatisfyAllConstraints) {
  const LabelSpace ls({0, 0.5, 1.5, 1.75, 3});
  std::mt19937_64 rng(13);
  std::normal_distribution<double> Z(0.0, 2.0);
  for (auto kind : {RegularizerKind::Isotropic, RegularizerKind::Anisotropic}) {
    int violations = 0;
    for (int m = 0; m < 10; ++m) {
      Eigen::MatrixXd P(4, 2);
      for (Index j = 0; j < P.size(); ++j) P.data()[j] = Z(rng);
      const auto rep = check_K_equivalence(proj_K(P, ls, kind, 1.0), ls, 10000, 100 + m, kind);
      violations += rep.violations;
      EXPECT_TRUE(rep.witness_failures.empty());
      EXPECT_GE(rep.worst_margin, -1e-10);
    }
    EXPECT_EQ(violations, 0);
  }
}

TEST(TwoPixelRof, ClosedForm) {
  const auto [a, b] = two_pixel_rof(0.0, 1.0, 2.0);
  EXPECT_DOUBLE_EQ(a, 0.5);
  EXPECT_DOUBLE_EQ(b, 0.5);
  const auto [c, d] = two_pixel_rof(0.0, 1.0, 0.5);
  EXPECT_DOUBLE_EQ(c, 0.25);
  EXPECT_DOUBLE_EQ(d, 0.75);
  const auto [e, f] = two_pixel_rof(0.9, 0.1, 0.2);
  EXPECT_NEAR(e, 0.8, 1e-15);
  EXPECT_NEAR(f, 0.2, 1e-15);
}

TEST(SolveDirect, MatchesTwoPixelClosedForm) {
  const GridShape g(2, 1);
  for (double lambda : {0.25, 0.5, 2.0}) {
    std::vector<ConvexPiece> pieces{quadratic_piece(1, 0, 0, 0, 1), quadratic_piece(1, -2, 1, 0, 1)};
    const auto u = solve_direct(g, pieces, lambda, RegularizerKind::Isotropic);
    const auto [a, b] = two_pixel_rof(0.0, 1.0, lambda);
    EXPECT_NEAR(u.values[0], a, 1e-6);
    EXPECT_NEAR(u.values[1], b, 1e-6);
  }
}

TEST(SolveDirect, PolylinePiecesStayInRange) {
  const GridShape g(3, 3);
  std::vector<ConvexPiece> pieces;
  for (Index n = 0; n < g.size(); ++n) pieces.push_back(polyline_piece({0, 0.5, 1}, {n % 2 ? 1.0 : 0.0, 0.2, 0.6}));
  const auto u = solve_direct(g, pieces, 0.1, RegularizerKind::Anisotropic);
  for (Index n = 0; n < g.size(); ++n) {
    EXPECT_GE(u.values[n], 0.0);
    EXPECT_LE(u.values[n], 1.0);
  }
}

TEST(RunVerification, AllChecksPassAndReportsAreComplete) {
  const auto rep = run_verification(1);
  EXPECT_TRUE(rep.passed());
  EXPECT_GE(rep.entries.size(), 9u);
  for (const auto& e : rep.entries) EXPECT_TRUE(e.passed) << e.name << " " << e.value << " > " << e.tolerance;
  std::ostringstream txt, csv;
  rep.write_text(txt);
  rep.write_csv(csv);
  EXPECT_NE(txt.str().find("K_equivalence_iso"), std::string::npos);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "check,value,tolerance,passed");
}
