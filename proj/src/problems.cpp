#include "sublift/problems.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>

namespace sublift {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

ScalarField clamped(const ScalarField& f, const LabelSpace& ls) {
  ScalarField out = f;
  out.values = out.values.cwiseMax(ls.min()).cwiseMin(ls.max());
  return out;
}

// Central differences, replicate border.
void image_gradient(const ScalarField& img, Eigen::VectorXd& gx, Eigen::VectorXd& gy) {
  const GridShape& g = img.grid;
  gx.resize(g.size());
  gy.resize(g.size());
  for (Index y = 0; y < g.height; ++y)
    for (Index x = 0; x < g.width; ++x) {
      const Index xl = std::max<Index>(x - 1, 0), xr = std::min<Index>(x + 1, g.width - 1);
      const Index yu = std::max<Index>(y - 1, 0), yd = std::min<Index>(y + 1, g.height - 1);
      gx[g.pixel(x, y)] = 0.5 * (img(xr, y) - img(xl, y));
      gy[g.pixel(x, y)] = 0.5 * (img(x, yd) - img(x, yu));
    }
}

// Upper envelope of the lines slope_j * g - offset_j on [a, b], returned as
// the vertices of the corresponding polyline.
PolyLinePiece envelope_of_lines(const std::vector<double>& slopes, const std::vector<double>& offsets, double a,
                                double b) {
  auto F = [&](double g) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < slopes.size(); ++j) best = std::max(best, slopes[j] * g - offsets[j]);
    return best;
  };
  std::vector<double> xs{a, b};
  for (std::size_t i = 0; i < slopes.size(); ++i)
    for (std::size_t j = i + 1; j < slopes.size(); ++j) {
      const double ds = slopes[j] - slopes[i];
      if (ds == 0.0) continue;
      const double x = (offsets[j] - offsets[i]) / ds;
      if (x > a && x < b) xs.push_back(x);
    }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::vector<double> ys(xs.size());
  for (std::size_t m = 0; m < xs.size(); ++m) ys[m] = F(xs[m]);
  return convexify_interval(xs, ys);
}

}  // namespace

DatatermVolume build_rof(const ScalarField& f, const LabelSpace& ls) {
  const ScalarField fc = clamped(f, ls);
  std::vector<ConvexPiece> pieces;
  pieces.reserve(static_cast<std::size_t>(f.grid.size() * ls.num_intervals()));
  for (Index n = 0; n < f.grid.size(); ++n) {
    const double v = fc.values[n];
    for (Index i = 0; i < ls.num_intervals(); ++i)
      pieces.emplace_back(quadratic_piece(1.0, -2.0 * v, v * v, ls.lower(i), ls.upper(i)));
  }
  return DatatermVolume(f.grid, ls, std::move(pieces));
}

CostFunction rof_cost(const ScalarField& f, const LabelSpace& ls) {
  auto data = std::make_shared<const Eigen::VectorXd>(clamped(f, ls).values);
  return [data](Index n, double g) {
    const double d = g - (*data)[n];
    return d * d;
  };
}

CostFunction trunc_quad_cost(const ScalarField& f, double alpha, double nu) {
  if (!(alpha > 0.0) || !(nu > 0.0)) throw ArgumentError("truncated quadratic needs alpha > 0 and nu > 0");
  auto data = std::make_shared<const Eigen::VectorXd>(f.values);
  return [data, alpha, nu](Index n, double g) {
    const double d = g - (*data)[n];
    return 0.5 * alpha * std::min(d * d, nu);
  };
}

DatatermVolume build_trunc_quad(const ScalarField& f, double alpha, double nu, const LabelSpace& ls, int sublabels) {
  return sample_costs(f.grid, ls, trunc_quad_cost(f, alpha, nu), sublabels);
}

CostVolume build_stereo_cost(const ScalarField& left, const ScalarField& right, const StereoOptions& opt) {
  if (!(left.grid == right.grid)) throw InputError("stereo pair must have identical dimensions");
  if (opt.max_disparity <= opt.min_disparity) throw ArgumentError("stereo: need max_disparity > min_disparity");
  if (opt.patch < 1) throw ArgumentError("stereo: patch size must be >= 1");
  const GridShape g = left.grid;
  Eigen::VectorXd lx, ly, rx, ry;
  image_gradient(left, lx, ly);
  image_gradient(right, rx, ry);

  const int M = opt.max_disparity - opt.min_disparity + 1;
  CostVolume cv(g, M, opt.min_disparity, opt.max_disparity);
  const int before = (opt.patch - 1) / 2;  // 4x4 patch spans offsets -1..2
  const int after = opt.patch - 1 - before;
  for (Index y = 0; y < g.height; ++y)
    for (Index x = 0; x < g.width; ++x)
      for (int j = 0; j < M; ++j) {
        const int d = opt.min_disparity + j;
        double cost = 0.0;
        for (int oy = -before; oy <= after; ++oy)
          for (int ox = -before; ox <= after; ++ox) {
            const Index py = std::clamp<Index>(y + oy, 0, g.height - 1);
            const Index px = std::clamp<Index>(x + ox, 0, g.width - 1);
            const Index qx = std::clamp<Index>(px - d, 0, g.width - 1);
            const Index p = g.pixel(px, py), q = g.pixel(qx, py);
            const double diff = std::abs(lx[p] - rx[q]) + std::abs(ly[p] - ry[q]);
            cost += std::min(diff, opt.truncation);
          }
        cv.at(g.pixel(x, y), j) = static_cast<float>(cost);
      }
  return cv;
}

double circular_distance_sq(double a, double b) {
  double d = std::fmod(std::abs(a - b), kTwoPi);
  d = std::min(d, kTwoPi - d);
  return d * d;
}

CostFunction unwrap_cost(const ScalarField& wrapped) {
  auto data = std::make_shared<const Eigen::VectorXd>(wrapped.values);
  return [data](Index n, double g) { return circular_distance_sq(g, (*data)[n]); };
}

DatatermVolume build_unwrap(const ScalarField& wrapped, const LabelSpace& ls, int sublabels) {
  if (sublabels < 2) throw ArgumentError("build_unwrap: need at least 2 sublabels");
  const Index k = ls.num_intervals();
  std::vector<ConvexPiece> pieces;
  pieces.reserve(static_cast<std::size_t>(wrapped.grid.size() * k));
  std::vector<double> slopes, offsets;
  for (Index n = 0; n < wrapped.grid.size(); ++n) {
    const double f = wrapped.values[n];
    if (!(f >= 0.0 && f < kTwoPi + 1e-12)) throw InputError("wrapped phase must lie in [0, 2 pi)");
    for (Index i = 0; i < k; ++i) {
      const double a = ls.lower(i), b = ls.upper(i);
      // Branch m (center f + 2 pi m) is the nearest one on [c - pi, c + pi].
      const long m_lo = std::lround((a - f) / kTwoPi);
      const long m_hi = std::lround((b - f) / kTwoPi);
      if (m_lo == m_hi) {
        const double c = f + kTwoPi * static_cast<double>(m_lo);
        pieces.emplace_back(quadratic_piece(1.0, -2.0 * c, c * c, a, b));
        continue;
      }
      // Supporting lines of the convex envelope of the branch arcs, with
      // slopes spread over the arcs' derivative range.
      std::vector<QuadraticPiece> arcs;
      double s_min = std::numeric_limits<double>::infinity(), s_max = -s_min;
      for (long m = m_lo; m <= m_hi; ++m) {
        const double c = f + kTwoPi * static_cast<double>(m);
        const double lo = std::max(a, c - std::numbers::pi), hi = std::min(b, c + std::numbers::pi);
        if (!(lo < hi)) continue;
        arcs.push_back(QuadraticPiece{1.0, -2.0 * c, c * c, lo, hi});
        s_min = std::min(s_min, 2.0 * (lo - c));
        s_max = std::max(s_max, 2.0 * (hi - c));
      }
      const int lines = 4 * sublabels + 1;
      slopes.resize(static_cast<std::size_t>(lines));
      offsets.resize(slopes.size());
      for (int j = 0; j < lines; ++j) {
        const double s = s_min + (s_max - s_min) * j / (lines - 1);
        double conj = -std::numeric_limits<double>::infinity();
        for (const auto& arc : arcs) conj = std::max(conj, conjugate_eval(arc, s));
        slopes[static_cast<std::size_t>(j)] = s;
        offsets[static_cast<std::size_t>(j)] = conj;
      }
      pieces.emplace_back(envelope_of_lines(slopes, offsets, a, b));
    }
  }
  return DatatermVolume(wrapped.grid, ls, std::move(pieces));
}

CostVolume build_dff_cost(const std::vector<ScalarField>& stack, int window) {
  if (stack.size() < 2) throw ArgumentError("depth from focus needs at least 2 images");
  if (window < 1) throw ArgumentError("contrast window must be >= 1");
  const GridShape g = stack.front().grid;
  for (const auto& img : stack)
    if (!(img.grid == g)) throw InputError("focal stack images must have identical dimensions");

  const Index M = static_cast<Index>(stack.size());
  const int r = window / 2;
  Eigen::MatrixXd contrast(M, g.size());
  Eigen::VectorXd ml(g.size());
  for (Index j = 0; j < M; ++j) {
    const ScalarField& I = stack[static_cast<std::size_t>(j)];
    for (Index y = 0; y < g.height; ++y)
      for (Index x = 0; x < g.width; ++x) {
        const Index xl = std::max<Index>(x - 1, 0), xr = std::min<Index>(x + 1, g.width - 1);
        const Index yu = std::max<Index>(y - 1, 0), yd = std::min<Index>(y + 1, g.height - 1);
        const double c = I(x, y);
        ml[g.pixel(x, y)] = std::abs(2.0 * c - I(xl, y) - I(xr, y)) + std::abs(2.0 * c - I(x, yu) - I(x, yd));
      }
    for (Index y = 0; y < g.height; ++y)
      for (Index x = 0; x < g.width; ++x) {
        double acc = 0.0;
        for (int oy = -r; oy <= r; ++oy)
          for (int ox = -r; ox <= r; ++ox)
            acc += ml[g.pixel(std::clamp<Index>(x + ox, 0, g.width - 1), std::clamp<Index>(y + oy, 0, g.height - 1))];
        contrast(j, g.pixel(x, y)) = acc;
      }
  }
  CostVolume cv(g, M, 0.0, static_cast<double>(M - 1));
  for (Index n = 0; n < g.size(); ++n) {
    const double top = contrast.col(n).maxCoeff();
    for (Index j = 0; j < M; ++j) cv.at(n, j) = static_cast<float>(top - contrast(j, n));
  }
  return cv;
}

CostFunction cost_volume_cost(const CostVolume& cv) {
  auto data = std::make_shared<const CostVolume>(cv);
  return [data](Index n, double g) { return data->interpolate(n, g); };
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

void ProblemSpec::validate() const {
  if (!(lambda > 0.0)) throw ArgumentError("lambda must be > 0");
  if (sublabels < 2) throw ArgumentError("sublabel sample count must be >= 2");
  if (const auto* t = std::get_if<TruncQuadParams>(&data))
    if (!(t->alpha > 0.0) || !(t->nu > 0.0)) throw ArgumentError("truncated quadratic needs alpha > 0 and nu > 0");
}

GridShape ProblemSpec::grid() const {
  return std::visit(overloaded{[](const RofParams& p) { return p.f.grid; },
                               [](const TruncQuadParams& p) { return p.f.grid; },
                               [](const StereoParams& p) { return p.costs.grid; },
                               [](const UnwrapParams& p) { return p.wrapped.grid; },
                               [](const DffParams& p) { return p.costs.grid; }},
                    data);
}

CostFunction ProblemSpec::cost() const {
  return std::visit(overloaded{[this](const RofParams& p) { return rof_cost(p.f, ls); },
                               [](const TruncQuadParams& p) { return trunc_quad_cost(p.f, p.alpha, p.nu); },
                               [](const StereoParams& p) { return cost_volume_cost(p.costs); },
                               [](const UnwrapParams& p) { return unwrap_cost(p.wrapped); },
                               [](const DffParams& p) { return cost_volume_cost(p.costs); }},
                    data);
}

DatatermVolume ProblemSpec::sublabel_dataterm() const {
  validate();
  return std::visit(
      overloaded{[this](const RofParams& p) { return build_rof(p.f, ls); },
                 [this](const TruncQuadParams& p) { return build_trunc_quad(p.f, p.alpha, p.nu, ls, sublabels); },
                 [this](const StereoParams& p) { return volume_from_costs(p.costs, ls); },
                 [this](const UnwrapParams& p) { return build_unwrap(p.wrapped, ls, sublabels); },
                 [this](const DffParams& p) { return volume_from_costs(p.costs, ls); }},
      data);
}

BaselineCosts ProblemSpec::baseline_costs() const {
  validate();
  if (const auto* s = std::get_if<StereoParams>(&data)) return baseline_from_costs(s->costs, ls);
  if (const auto* d = std::get_if<DffParams>(&data)) return baseline_from_costs(d->costs, ls);
  return sample_label_costs(grid(), ls, cost());
}

}  // namespace sublift
