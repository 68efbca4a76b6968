#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "projection_cases.hpp"
#include "sublift/cost_volume.hpp"
#include "sublift/image_io.hpp"
#include "sublift/lifting.hpp"
#include "sublift/operators.hpp"
#include "sublift/oracles.hpp"
#include "sublift/pieces.hpp"
#include "sublift/problems.hpp"
#include "sublift/solver.hpp"

using namespace sublift;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;

void report(int id, const std::string& name, const Outcome& o) {
  if (!o.pass) ++g_failed;
  std::cout << (o.pass ? "PASS" : "FAIL") << "  [" << id << "] " << name << ": " << o.detail << std::endl;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

ScalarField piecewise_smooth(GridShape g) {
  ScalarField f(g);
  for (Index y = 0; y < g.height; ++y)
    for (Index x = 0; x < g.width; ++x) {
      double v = (x < g.width / 2 ? 0.25 : 0.7) + 0.2 * std::sin(0.15 * static_cast<double>(y));
      if (y > 5 * g.height / 8 && x > g.width / 6 && x < 4 * g.width / 5) v += 0.05 * x / static_cast<double>(g.width);
      f(x, y) = v;
    }
  return f;
}

ScalarField textured(GridShape g, std::uint64_t seed) {
  ScalarField f(g);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (Index n = 0; n < g.size(); ++n) f.values[n] = U(rng);
  return f;
}

std::vector<ConvexPiece> whole_range_pieces(const DatatermVolume& dt) {
  std::vector<ConvexPiece> pieces;
  for (Index n = 0; n < dt.grid().size(); ++n) pieces.push_back(dt.piece(n, 0));
  return pieces;
}

Outcome rof_tightness() {
  const GridShape g(64, 64);
  const auto f = piecewise_smooth(g);
  const double lambda = 0.25;
  const auto kind = RegularizerKind::Isotropic;
  const LabelSpace range({0, 1});
  const auto rho = rof_cost(f, range);
  DirectOptions opt;
  opt.max_iters = 100000;
  opt.tol = 1e-12;
  const auto pieces = whole_range_pieces(build_rof(f, range));
  const double e_direct = energy_scalar(rho, solve_direct(g, pieces, lambda, kind, opt), lambda, kind);
  Outcome o{true, "E_direct=" + fmt(e_direct)};
  SolverConfig cfg;
  cfg.lambda = lambda;
  for (Index L : {2, 4, 8}) {
    const auto res = solve_sublabel(build_rof(f, LabelSpace::uniform(0, 1, L)), cfg, rho);
    const double rel = res.log.last().energy / e_direct - 1.0;
    o.pass = o.pass && std::abs(rel) <= 1e-3;
    o.detail += " sublabel L=" + std::to_string(L) + " rel=" + fmt(rel);
  }
  const auto ls8 = LabelSpace::uniform(0, 1, 8);
  const auto base = solve_baseline(sample_label_costs(g, ls8, rho), cfg, rho);
  const double rel_base = base.log.last().energy / e_direct - 1.0;
  o.pass = o.pass && rel_base >= 1e-2;
  o.detail += " baseline L=8 rel=" + fmt(rel_base) + " (need <=1e-3 / >=1e-2)";
  return o;
}

Outcome two_pixel() {
  const GridShape g(2, 1);
  ScalarField f(g);
  f.values << 0.0, 1.0;
  SolverConfig cfg;
  cfg.lambda = 2.0;
  const auto [c0, c1] = two_pixel_rof(0.0, 1.0, cfg.lambda);
  Outcome o{std::abs(c0 - 0.5) <= 1e-12 && std::abs(c1 - 0.5) <= 1e-12, "closed form (" + fmt(c0) + ", " + fmt(c1) + ")"};
  double worst = 0.0;
  for (Index L : {2, 3, 5}) {
    const auto ls = LabelSpace::uniform(0, 1, L);
    const auto u = unlift_field(ls, solve_sublabel(build_rof(f, ls), cfg).u);
    worst = std::max({worst, std::abs(u.values[0] - 0.5), std::abs(u.values[1] - 0.5)});
  }
  const auto ls3 = LabelSpace::uniform(0, 1, 3);
  const auto ub = unlift_field(ls3, solve_baseline(sample_label_costs(g, ls3, rof_cost(f, ls3)), cfg).u);
  const double worst_base = std::max(std::abs(ub.values[0] - 0.5), std::abs(ub.values[1] - 0.5));
  o.pass = o.pass && worst <= 1e-3 && worst_base <= 1e-3;
  o.detail += " sublabel L=2,3,5 max|u-0.5|=" + fmt(worst) + " baseline L=3 max|u-0.5|=" + fmt(worst_base) +
              " (tol 1e-3)";
  return o;
}

Outcome prop3_equivalence() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const GridShape g(16, 16);
  SolverConfig cfg;
  cfg.lambda = 0.3;
  cfg.stop_tol = 1e-10;
  cfg.max_iters = 60000;
  double worst = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    std::vector<double> labels{0.0};
    for (int i = 0; i < 4; ++i) labels.push_back(labels.back() + 0.2 + U(rng));
    const LabelSpace ls(labels);
    Eigen::MatrixXd costs(ls.num_labels(), g.size());
    for (Index j = 0; j < costs.size(); ++j) costs(j) = U(rng);
    const BaselineCosts bc(g, ls, costs);
    const auto base = solve_baseline(bc, cfg);
    const auto sub = solve_sublabel(piecewise_linear_volume(bc), cfg);
    const double eb = relaxed_linear_energy(bc, base.u, cfg.lambda, cfg.regularizer);
    const double es = relaxed_linear_energy(bc, sub.u, cfg.lambda, cfg.regularizer);
    worst = std::max(worst, std::abs(eb / es - 1.0));
  }
  const auto rep = check_prop3(LabelSpace({0, 1, 2}), {0, 1, 4}, 100, 5);
  return {worst <= 1e-6 && rep.passed(), "5 instances max rel energy gap=" + fmt(worst) +
                                              " (tol 1e-6); envelope max dev=" + fmt(rep.max_deviation) +
                                              " worst/tol=" + fmt(rep.worst_ratio) + " over 100 trials"};
}

Outcome prop4_binary() {
  const LabelSpace ls({0, 1});
  std::vector<double> gs, vs;
  for (int j = 0; j <= 50; ++j) {
    const double x = j / 50.0;
    gs.push_back(x);
    vs.push_back(std::min(8 * (x - 0.2) * (x - 0.2), 0.1 + 8 * (x - 0.8) * (x - 0.8)));
  }
  const std::vector<std::pair<std::string, ConvexPiece>> cases{
      {"convex", quadratic_piece(1.0, -0.6, 0.09, 0.0, 1.0)},
      {"two_minima", convexify_interval(gs, vs)},
      {"affine", polyline_piece({0, 1}, {0.7, -0.2})}};
  Outcome o{true, ""};
  std::uint64_t seed = 41;
  for (const auto& [name, piece] : cases) {
    const auto rep = check_prop4(ls, piece, 100, seed++);
    o.pass = o.pass && rep.passed();
    o.detail += name + " dev=" + fmt(rep.max_deviation) + " worst/tol=" + fmt(rep.worst_ratio) + " ";
  }
  o.detail += "(100 trials each)";
  return o;
}

Outcome k_equivalence() {
  const LabelSpace ls({0, 0.5, 1.5, 1.75, 3});
  std::mt19937_64 rng(51);
  std::normal_distribution<double> Z(0.0, 2.0);
  int violations = 0, samples = 0, missed = 0;
  double margin = 1e300;
  for (auto kind : {RegularizerKind::Isotropic, RegularizerKind::Anisotropic}) {
    for (int m = 0; m < 10; ++m) {
      Eigen::MatrixXd P(ls.num_intervals(), 2);
      for (Index j = 0; j < P.size(); ++j) P.data()[j] = Z(rng);
      const auto rep = check_K_equivalence(proj_K(P, ls, kind, 1.0), ls, 10000, 60 + m, kind);
      violations += rep.violations;
      samples += rep.samples;
      margin = std::min(margin, rep.worst_margin);
      if (!rep.witness_failures.empty()) ++missed;
    }
    for (Index row = 0; row < ls.num_intervals(); ++row) {
      Eigen::MatrixXd P = Eigen::MatrixXd::Zero(ls.num_intervals(), 2);
      const double w = 1.01 * ls.width(row);
      if (kind == RegularizerKind::Isotropic) P.row(row) << 0.6 * w, 0.8 * w;
      else P.row(row) << -w, 0.5 * w;
      const auto rep = check_K_equivalence(P, ls, 10, 70, kind);
      if (rep.witness_failures.size() != 1 || rep.witness_failures.front() != row) ++missed;
    }
  }
  return {violations == 0 && margin >= -1e-10 && missed == 0,
          std::to_string(samples) + " samples after proj_K, violations=" + std::to_string(violations) +
              " worst margin=" + fmt(margin) + "; witness misses=" + std::to_string(missed)};
}

Outcome projection_suite() {
  Outcome o{true, ""};
  for (const auto& c : cases::all_cases()) {
    std::mt19937_64 rng(2024);
    double idem = 0, feas = 0, expand = 0, vi = -1e300;
    for (int t = 0; t < 10000; ++t) {
      const Eigen::VectorXd x = c.input(rng), y = c.input(rng);
      const Eigen::VectorXd px = c.proj(x), py = c.proj(y);
      idem = std::max(idem, (c.proj(px) - px).lpNorm<Eigen::Infinity>());
      feas = std::max(feas, c.violation(px));
      expand = std::max(expand, (px - py).norm() - (x - y).norm());
      vi = std::max(vi, (x - px).dot(c.feasible_point(rng) - px));
    }
    const bool ok = idem <= 1e-12 && feas <= 1e-10 && expand <= 1e-10 && vi <= 1e-8;
    o.pass = o.pass && ok;
    if (!ok)
      o.detail += std::string(c.name) + " idem=" + fmt(idem) + " feas=" + fmt(feas) + " expand=" + fmt(expand) +
                  " vi=" + fmt(vi) + "; ";
  }
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> U(-3, 3), A(0.2, 3);
  double dense = 0.0;
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
    dense = std::max({dense, std::abs(p[0] - bx), std::abs(p[1] - a * bx * bx)});
  }
  o.pass = o.pass && dense <= 1e-3;
  o.detail += std::to_string(cases::all_cases().size()) +
              " projections x 1e4 inputs (idem 1e-12, feas 1e-10, nonexpansive, VI 1e-8); parabola vs dense max=" +
              fmt(dense) + " (tol 1e-3)";
  return o;
}

Outcome adjointness() {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> Z;
  const GridShape g(32, 32);
  const Index k = 4, N = g.size();
  Eigen::MatrixXd u(k, N), px(k, N), py(k, N), gx(k, N), gy(k, N), d(k, N);
  for (Index j = 0; j < u.size(); ++j) u(j) = Z(rng), px(j) = Z(rng), py(j) = Z(rng);
  grad(g, u, gx, gy);
  div(g, px, py, d);
  const double r = gx.cwiseProduct(px).sum() + gy.cwiseProduct(py).sum() + u.cwiseProduct(d).sum();
  return {std::abs(r) <= 1e-10, "<grad u,p> + <u,div p> = " + fmt(r) + " (tol 1e-10)"};
}

Outcome robust_denoising() {
  const GridShape g(64, 64);
  auto f = piecewise_smooth(g);
  std::mt19937_64 rng(81);
  std::normal_distribution<double> Z(0.0, 0.05);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (Index n = 0; n < g.size(); ++n) {
    double v = f.values[n] + Z(rng);
    if (U(rng) < 0.1) v = U(rng) < 0.5 ? 0.0 : 1.0;
    f.values[n] = std::clamp(v, 0.0, 1.0);
  }
  SolverConfig cfg;
  cfg.lambda = 1.0;
  const ProblemSpec sub{TruncQuadParams{f, 25.0, 0.025}, LabelSpace::uniform(0, 1, 4), cfg.lambda};
  const ProblemSpec base{TruncQuadParams{f, 25.0, 0.025}, LabelSpace::uniform(0, 1, 16), cfg.lambda};
  const double es = solve_sublabel(sub.sublabel_dataterm(), cfg, sub.cost()).log.last().energy;
  const double eb = solve_baseline(base.baseline_costs(), cfg, base.cost()).log.last().energy;
  return {es <= eb, "sublabel L=4 E=" + fmt(es) + " baseline L=16 E=" + fmt(eb) + " (need sublabel <= baseline)"};
}

Outcome phase_unwrapping() {
  const GridShape g(32, 32);
  ScalarField wrapped(g), truth(g);
  for (Index y = 0; y < g.height; ++y)
    for (Index x = 0; x < g.width; ++x) {
      truth(x, y) = 4 * kPi * static_cast<double>(x) / (g.width - 1) * 0.999;
      wrapped(x, y) = std::fmod(truth(x, y), 2 * kPi);
    }
  const ProblemSpec spec{UnwrapParams{wrapped}, LabelSpace::uniform(0, 4 * kPi, 8), 0.005};
  SolverConfig cfg;
  cfg.lambda = spec.lambda;
  auto mse = [&](const LiftedField& u) {
    const auto v = unlift_field(spec.ls, u);
    double s = 0.0;
    int n = 0;
    for (Index y = 2; y < g.height - 2; ++y)
      for (Index x = 2; x < g.width - 2; ++x, ++n) s += std::pow(v(x, y) - truth(x, y), 2);
    return s / n;
  };
  const double ms = mse(solve_sublabel(spec.sublabel_dataterm(), cfg, spec.cost()).u);
  const double mb = mse(solve_baseline(spec.baseline_costs(), cfg, spec.cost()).u);
  return {ms < mb && ms < 0.05,
          "interior MSE sublabel L=8 " + fmt(ms) + " baseline L=8 " + fmt(mb) + " (need sublabel < baseline, < 0.05)"};
}

Outcome stereo_smoke() {
  const GridShape g(48, 32);
  const auto left = textured(g, 91);
  ScalarField right(g);
  for (Index y = 0; y < g.height; ++y)
    for (Index x = 0; x < g.width; ++x) right(x, y) = left(std::min<Index>(x + 3, g.width - 1), y);
  StereoOptions opt;
  opt.max_disparity = 8;
  const auto cv = build_stereo_cost(left, right, opt);
  const LabelSpace ls({0.0, 8.0});
  SolverConfig cfg;
  const auto d = unlift_field(ls, solve_sublabel(volume_from_costs(cv, ls), cfg).u);
  std::vector<double> interior;
  for (Index y = 4; y < g.height - 4; ++y)
    for (Index x = opt.max_disparity + 4; x < g.width - 8; ++x) interior.push_back(d(x, y));
  std::nth_element(interior.begin(), interior.begin() + interior.size() / 2, interior.end());
  const double median = interior[interior.size() / 2];
  return {std::abs(median - 3.0) <= 0.5, "sublabel L=2 interior median disparity " + fmt(median) + " (need 3 +- 0.5)"};
}

Outcome variable_accounting() {
  const GridShape g(10, 10);
  bool ok = true;
  std::string detail;
  for (Index L : {2, 5, 9}) {
    const auto b = variable_count(g, L, Method::Baseline);
    const auto s = variable_count(g, L, Method::Sublabel);
    ok = ok && b == 4 * g.size() * (L - 1) && s == 6 * g.size() * (L - 1) + g.size();
    detail += "L=" + std::to_string(L) + ": " + std::to_string(b) + "/" + std::to_string(s) + " ";
  }
  ok = ok && variable_count(GridShape(1, 1), 2, Method::Baseline) == 4 &&
       variable_count(GridShape(1, 1), 2, Method::Sublabel) == 7;
  return {ok, detail + "on N=100 (baseline/sublabel); N=1, L=2 gives 4/7"};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const fs::path dir = fs::temp_directory_path() / "sublift_acceptance_determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write_pgm(dir / "in.pgm", textured(GridShape(16, 12), 101));
  const std::string exe = SUBLIFT_CLI_PATH;
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    const std::string cmd = exe + " robust --input " + (dir / "in.pgm").string() + " --labels 4 --max-iters 500 -o " +
                            (dir / run).string() + " > /dev/null 2>&1";
    ok = ok && std::system(cmd.c_str()) == 0;
  }
  int compared = 0;
  for (const char* name : {"result.pfm", "result.pgm", "energy.csv", "summary.txt"}) {
    const auto a = slurp(dir / "a" / name);
    ok = ok && !a.empty() && a == slurp(dir / "b" / name);
    ++compared;
  }
  fs::remove_all(dir);
  return {ok, std::to_string(compared) + " output files byte-identical across two CLI runs"};
}

}  // namespace

int main() {
  report(1, "ROF tightness", rof_tightness());
  report(2, "two-pixel ROF closed form", two_pixel());
  report(3, "piecewise-linear equivalence", prop3_equivalence());
  report(4, "binary-label envelope", prop4_binary());
  report(5, "constraint set reduction", k_equivalence());
  report(6, "projection suite", projection_suite());
  report(7, "operator adjointness", adjointness());
  report(8, "robust denoising", robust_denoising());
  report(9, "phase unwrapping", phase_unwrapping());
  report(10, "stereo smoke test", stereo_smoke());
  report(11, "variable accounting", variable_accounting());
  report(12, "determinism", determinism());
  std::cout << (g_failed == 0 ? "ALL PASS" : std::to_string(g_failed) + " FAILED") << std::endl;
  return g_failed == 0 ? 0 : 1;
}
