#include "sublift/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>

#include "sublift/lifting.hpp"
#include "sublift/operators.hpp"

namespace sublift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double envelope_objective(const LabelSpace& ls, std::span<const ConvexPiece> pieces, const Eigen::VectorXd& u,
                          const Eigen::VectorXd& v) {
  double worst = -kInf;
  for (Index i = 0; i < ls.num_intervals(); ++i) worst = std::max(worst, lifted_conjugate_eval(ls, pieces, v, i));
  return u.dot(v) - worst;
}

std::pair<double, double> overall_slopes(std::span<const ConvexPiece> pieces) {
  double lo = kInf, hi = -kInf;
  for (const auto& p : pieces) {
    const auto [a, b] = piece_slope_range(p);
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  return {lo, hi};
}

Eigen::VectorXd random_feasible(Index k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<double> x(static_cast<std::size_t>(k));
  for (double& e : x) e = U(rng);
  std::sort(x.begin(), x.end(), std::greater<>());
  return Eigen::Map<Eigen::VectorXd>(x.data(), k);
}

// 1_i^alpha for a 0-based interval index.
Eigen::VectorXd lifted_indicator(Index k, Index i, double alpha) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(k);
  e.head(i).setOnes();
  e[i] = alpha;
  return e;
}

double prox_piece(const ConvexPiece& piece, double y, double tau) {
  if (const auto* q = std::get_if<QuadraticPiece>(&piece))
    return std::clamp((y - tau * q->b) / (1.0 + 2.0 * q->a * tau), q->lo, q->hi);
  const auto& p = std::get<PolyLinePiece>(piece);
  double best_x = p.lo(), best_val = kInf;
  for (std::size_t m = 0; m + 1 < p.size(); ++m) {
    const double x = std::clamp(y - tau * p.slope(m), p.gammas[m], p.gammas[m + 1]);
    const double t = (x - p.gammas[m]) / (p.gammas[m + 1] - p.gammas[m]);
    const double val = (1.0 - t) * p.values[m] + t * p.values[m + 1] + (x - y) * (x - y) / (2.0 * tau);
    if (val < best_val) best_val = val, best_x = x;
  }
  return best_x;
}

}  // namespace

SampledFunction SampledFunction::tabulate(const std::function<double(double)>& fn, double lo, double hi, double h) {
  if (!(hi > lo) || !(h > 0.0)) throw ArgumentError("tabulate: need lo < hi and h > 0");
  const auto steps = static_cast<long>(std::ceil((hi - lo) / h - 1e-9));
  SampledFunction sf;
  for (long j = 0; j <= steps; ++j) {
    const double g = j == steps ? hi : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(steps);
    sf.gammas.push_back(g);
    sf.values.push_back(fn(g));
  }
  return sf;
}

double brute_conjugate(const SampledFunction& sf, double t) {
  if (sf.gammas.empty()) throw ArgumentError("brute_conjugate: empty sample set");
  double best = -kInf;
  for (std::size_t m = 0; m < sf.gammas.size(); ++m) best = std::max(best, t * sf.gammas[m] - sf.values[m]);
  return best;
}

double envelope_grid_step(const LabelSpace& ls, std::span<const ConvexPiece> pieces, Index interval,
                          const EnvelopeSearch& search) {
  const auto [smin, smax] = overall_slopes(pieces);
  return ls.width(interval) * (smax - smin + 2.0) / static_cast<double>(search.resolution - 1);
}

double brute_lifted_envelope(const LabelSpace& ls, std::span<const ConvexPiece> pieces, const Eigen::VectorXd& u,
                             const EnvelopeSearch& search) {
  const Index k = ls.num_intervals();
  if (k > 3) throw UnsupportedError("brute_lifted_envelope supports k <= 3 only");
  if (static_cast<Index>(pieces.size()) != k || u.size() != k) throw ArgumentError("brute_lifted_envelope: size mismatch");
  if (search.resolution < 2) throw ArgumentError("brute_lifted_envelope: resolution must be >= 2");

  const auto [smin, smax] = overall_slopes(pieces);
  Eigen::VectorXd lo(k), step(k);
  for (Index i = 0; i < k; ++i) {
    lo[i] = ls.width(i) * (smin - 1.0);
    step[i] = envelope_grid_step(ls, pieces, i, search);
  }

  const int R = search.resolution;
  long total = 1;
  for (Index i = 0; i < k; ++i) total *= R;
  Eigen::VectorXd v(k), best_v(k);
  double best = -kInf;
  for (long idx = 0; idx < total; ++idx) {
    long rem = idx;
    for (Index i = 0; i < k; ++i) {
      v[i] = lo[i] + step[i] * static_cast<double>(rem % R);
      rem /= R;
    }
    const double val = envelope_objective(ls, pieces, u, v);
    if (val > best) best = val, best_v = v;
  }

  // Compass search around the best grid point.
  Eigen::VectorXd h = step;
  for (int round = 0; round < search.refine_rounds; ++round) {
    bool improved = false;
    for (Index i = 0; i < k; ++i)
      for (double dir : {-1.0, 1.0}) {
        v = best_v;
        v[i] += dir * h[i];
        const double val = envelope_objective(ls, pieces, u, v);
        if (val > best) best = val, best_v = v, improved = true;
      }
    if (!improved) h *= 0.5;
  }
  return best;
}

OracleReport check_prop3(const LabelSpace& ls, const std::vector<double>& label_costs, int trials,
                         std::uint64_t seed, const EnvelopeSearch& search) {
  const Index k = ls.num_intervals();
  if (static_cast<Index>(label_costs.size()) != ls.num_labels()) throw ArgumentError("check_prop3: need L label costs");
  std::vector<ConvexPiece> pieces;
  for (Index i = 0; i < k; ++i)
    pieces.emplace_back(PolyLinePiece{{ls.lower(i), ls.upper(i)},
                                      {label_costs[static_cast<std::size_t>(i)], label_costs[static_cast<std::size_t>(i + 1)]}});
  double h = 0.0;
  for (Index i = 0; i < k; ++i) h = std::max(h, envelope_grid_step(ls, pieces, i, search));

  std::mt19937_64 rng(seed);
  OracleReport rep;
  for (int t = 0; t < trials; ++t) {
    const Eigen::VectorXd u = random_feasible(k, rng);
    double closed = label_costs.front();
    for (Index i = 0; i < k; ++i)
      closed += u[i] * (label_costs[static_cast<std::size_t>(i + 1)] - label_costs[static_cast<std::size_t>(i)]);
    const double brute = brute_lifted_envelope(ls, pieces, u, search);
    const double dev = std::abs(brute - closed);
    const double tol = 2.0 * h * u.lpNorm<1>();
    rep.trials++;
    rep.max_deviation = std::max(rep.max_deviation, dev);
    rep.worst_ratio = std::max(rep.worst_ratio, tol > 0.0 ? dev / tol : (dev > 0.0 ? kInf : 0.0));
    if (dev > tol) rep.failures++;
  }
  return rep;
}

OracleReport check_prop4(const LabelSpace& ls, const ConvexPiece& piece, int trials, std::uint64_t seed,
                         const EnvelopeSearch& search) {
  if (ls.num_intervals() != 1) throw ArgumentError("check_prop4 needs exactly 2 labels");
  const std::span<const ConvexPiece> pieces(&piece, 1);
  const double h = envelope_grid_step(ls, pieces, 0, search);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  OracleReport rep;
  for (int t = 0; t < trials; ++t) {
    Eigen::VectorXd u(1);
    u[0] = U(rng);
    const double direct = piece_eval(piece, std::min(ls.min() + u[0] * ls.width(0), ls.max()));
    const double brute = brute_lifted_envelope(ls, pieces, u, search);
    const double dev = std::abs(brute - direct);
    const double tol = h * (1.0 + std::abs(u[0]));
    rep.trials++;
    rep.max_deviation = std::max(rep.max_deviation, dev);
    rep.worst_ratio = std::max(rep.worst_ratio, dev / tol);
    if (dev > tol) rep.failures++;
  }
  return rep;
}

KReport check_K_equivalence(const Eigen::MatrixXd& P, const LabelSpace& ls, int trials, std::uint64_t seed,
                            RegularizerKind kind) {
  const Index k = ls.num_intervals();
  if (P.rows() != k) throw ArgumentError("check_K_equivalence: P must have k rows");
  if (trials < 1) throw ArgumentError("check_K_equivalence: trials must be >= 1");
  auto norm = [kind](const Eigen::VectorXd& x) {
    return kind == RegularizerKind::Isotropic ? x.norm() : x.lpNorm<Eigen::Infinity>();
  };
  auto gamma_at = [&ls](Index i, double a) { return ls.lower(i) + a * ls.width(i); };

  KReport rep;
  rep.worst_margin = kInf;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<Index> I(0, k - 1);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < trials; ++t) {
    Index i = I(rng), j = I(rng);
    if (i > j) std::swap(i, j);
    const double a = U(rng), b = U(rng);
    const double lhs = norm(P.transpose() * (lifted_indicator(k, i, a) - lifted_indicator(k, j, b)));
    const double rhs = std::abs(gamma_at(i, a) - gamma_at(j, b));
    const double margin = rhs - lhs;
    rep.samples++;
    rep.worst_margin = std::min(rep.worst_margin, margin);
    if (margin < -1e-10) rep.violations++;
  }
  for (Index i = 0; i < k; ++i) {
    const double lhs = norm(P.transpose() * (lifted_indicator(k, i, 1.0) - lifted_indicator(k, i, 0.0)));
    if (lhs > ls.width(i) + 1e-10) rep.witness_failures.push_back(i);
  }
  return rep;
}

std::pair<double, double> two_pixel_rof(double f0, double f1, double lambda) {
  // Optimality: the gap shrinks by lambda (each pixel moves lambda / 2)
  // until it closes at the mean.
  const double mean = 0.5 * (f0 + f1);
  const double gap = f1 - f0;
  const double shrunk = std::copysign(std::max(0.0, std::abs(gap) - lambda), gap);
  return {mean - 0.5 * shrunk, mean + 0.5 * shrunk};
}

ScalarField solve_direct(GridShape grid, std::span<const ConvexPiece> pieces, double lambda, RegularizerKind kind,
                         const DirectOptions& opt) {
  const Index N = grid.size();
  if (static_cast<Index>(pieces.size()) != N) throw ArgumentError("solve_direct: need one piece per pixel");
  double mu = kInf;
  for (const auto& p : pieces) {
    const auto* q = std::get_if<QuadraticPiece>(&p);
    mu = q ? std::min(mu, 2.0 * q->a) : 0.0;
  }
  const bool accelerate = mu > 0.0 && std::isfinite(mu);

  Eigen::RowVectorXd u(N), u_bar(N), d(N), px = Eigen::RowVectorXd::Zero(N), py = Eigen::RowVectorXd::Zero(N);
  for (Index n = 0; n < N; ++n) {
    const auto& p = pieces[static_cast<std::size_t>(n)];
    u[n] = 0.5 * (piece_lower(p) + piece_upper(p));
  }
  u_bar = u;
  Eigen::RowVectorXd gx(N), gy(N);
  double tau = 0.99 / std::sqrt(8.0), sigma = 0.99 / std::sqrt(8.0);
  for (int it = 0; it < opt.max_iters; ++it) {
    grad(grid, u_bar, gx, gy);
    px += sigma * gx;
    py += sigma * gy;
    for (Index n = 0; n < N; ++n) {
      if (kind == RegularizerKind::Isotropic) {
        const double nrm = std::hypot(px[n], py[n]);
        if (nrm > lambda) px[n] *= lambda / nrm, py[n] *= lambda / nrm;
      } else {
        px[n] = std::clamp(px[n], -lambda, lambda);
        py[n] = std::clamp(py[n], -lambda, lambda);
      }
    }
    div(grid, px, py, d);
    double change = 0.0;
    u_bar = u;
    for (Index n = 0; n < N; ++n) {
      const double next = prox_piece(pieces[static_cast<std::size_t>(n)], u[n] + tau * d[n], tau);
      change = std::max(change, std::abs(next - u[n]));
      u[n] = next;
    }
    double theta = 1.0;
    if (accelerate) {
      theta = 1.0 / std::sqrt(1.0 + mu * tau);
      tau *= theta;
      sigma /= theta;
    }
    u_bar = u + theta * (u - u_bar);
    if (change < opt.tol && it > 10) break;
  }
  return ScalarField(grid, u.transpose());
}

}  // namespace sublift

namespace sublift {

bool VerifyReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const VerifyEntry& e) { return e.passed; });
}

void VerifyReport::write_text(std::ostream& os) const {
  for (const auto& e : entries) {
    os << (e.passed ? "PASS " : "FAIL ") << e.name << "  value=" << e.value << "  tolerance=" << e.tolerance << '\n';
  }
  os << (passed() ? "all checks passed" : "some checks failed") << '\n';
}

void VerifyReport::write_csv(std::ostream& os) const {
  os << "check,value,tolerance,passed\n";
  os.precision(17);
  for (const auto& e : entries) os << e.name << ',' << e.value << ',' << e.tolerance << ',' << (e.passed ? 1 : 0) << '\n';
}

void VerifyReport::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(os);
  if (!os) throw IoError("failed writing " + path.string());
}

VerifyReport run_verification(std::uint64_t seed) {
  VerifyReport rep;
  auto add = [&rep](std::string name, double value, double tol) {
    rep.entries.push_back({std::move(name), value, tol, value <= tol});
  };

  {
    const auto sf = SampledFunction::tabulate([](double g) { return g * g; }, 0.0, 1.0, 1e-3);
    double worst = 0.0;
    for (int j = 0; j <= 40; ++j) {
      const double t = -1.0 + 0.1 * j;
      const double exact = t <= 0.0 ? 0.0 : (t >= 2.0 ? t - 1.0 : 0.25 * t * t);
      worst = std::max(worst, std::abs(brute_conjugate(sf, t) - exact));
    }
    add("brute_conjugate_square", worst, 1e-3);
  }
  {
    const OracleReport r = check_prop3(LabelSpace({0.0, 1.0, 2.0}), {0.0, 1.0, 4.0}, 100, seed);
    add("prop3_envelope", r.worst_ratio, 1.0);
  }
  {
    const LabelSpace ls({0.0, 1.0});
    std::vector<double> g, c;
    for (int j = 0; j <= 1000; ++j) {
      g.push_back(j * 1e-3);
      c.push_back(std::min((g.back() - 0.2) * (g.back() - 0.2), (g.back() - 0.8) * (g.back() - 0.8)));
    }
    const std::vector<std::pair<std::string, ConvexPiece>> cases = {
        {"prop4_convex", quadratic_piece(1.0, -0.6, 0.09, 0.0, 1.0)},
        {"prop4_two_minima", convexify_interval(g, c)},
        {"prop4_affine", quadratic_piece(0.0, 2.0, 1.0, 0.0, 1.0)},
    };
    for (const auto& [name, piece] : cases) add(name, check_prop4(ls, piece, 100, seed).worst_ratio, 1.0);
  }
  {
    const LabelSpace ls({0.0, 0.5, 1.5, 1.75, 3.0});
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> Z(0.0, 2.0);
    for (const auto kind : {RegularizerKind::Isotropic, RegularizerKind::Anisotropic}) {
      Eigen::MatrixXd P(ls.num_intervals(), 2);
      for (Index i = 0; i < P.size(); ++i) P(i) = Z(rng);
      const KReport r = check_K_equivalence(proj_K(P, ls, kind), ls, 100000, seed, kind);
      const std::string tag = kind == RegularizerKind::Isotropic ? "iso" : "aniso";
      add("K_equivalence_" + tag, -r.worst_margin, 1e-10);
      int missed = 0;
      for (Index i = 0; i < ls.num_intervals(); ++i) {
        Eigen::MatrixXd Q = proj_K(P, ls, kind);
        Q.row(i) = Q.row(i).normalized() * ls.width(i) * 1.01;
        if (kind == RegularizerKind::Anisotropic) Q.row(i).setConstant(ls.width(i) * 1.01);
        const KReport w = check_K_equivalence(Q, ls, 1, seed, kind);
        if (std::find(w.witness_failures.begin(), w.witness_failures.end(), i) == w.witness_failures.end()) ++missed;
      }
      add("K_witness_" + tag, missed, 0.0);
    }
  }
  {
    const auto [a, b] = two_pixel_rof(0.0, 1.0, 2.0);
    add("two_pixel_closed_form", std::max(std::abs(a - 0.5), std::abs(b - 0.5)), 1e-12);
  }
  return rep;
}

}  // namespace sublift
