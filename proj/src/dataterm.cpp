#include "sublift/dataterm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sublift {

PolyLinePiece convexify_interval(std::span<const double> gammas, std::span<const double> costs) {
  if (gammas.size() != costs.size()) throw ArgumentError("convexify: sample arrays differ in length");
  if (gammas.size() < 2) throw ArgumentError("convexify: need at least 2 samples");

  std::vector<double> hx;
  std::vector<double> hy;
  hx.reserve(gammas.size());
  hy.reserve(gammas.size());
  double scale = 0.0;
  for (std::size_t m = 0; m < costs.size(); ++m) {
    if (!std::isfinite(costs[m]) || !std::isfinite(gammas[m])) throw InputError("convexify: non-finite sample");
    if (m > 0 && !(gammas[m - 1] < gammas[m])) throw ArgumentError("convexify: samples must be strictly ascending");
    scale = std::max(scale, std::abs(costs[m]));
  }
  const double span_x = gammas.back() - gammas.front();
  const double eps = 1e-13 * (1.0 + scale) * span_x;

  for (std::size_t m = 0; m < gammas.size(); ++m) {
    const double x = gammas[m];
    const double y = costs[m];
    while (hx.size() >= 2) {
      const std::size_t n = hx.size();
      const double cross = (hx[n - 1] - hx[n - 2]) * (y - hy[n - 2]) - (hy[n - 1] - hy[n - 2]) * (x - hx[n - 2]);
      if (cross > eps) break;
      hx.pop_back();
      hy.pop_back();
    }
    hx.push_back(x);
    hy.push_back(y);
  }
  return PolyLinePiece{std::move(hx), std::move(hy)};
}

DatatermVolume::DatatermVolume(GridShape grid, LabelSpace ls, std::vector<ConvexPiece> pieces)
    : grid_(grid), ls_(std::move(ls)), pieces_(std::move(pieces)) {
  if (static_cast<Index>(pieces_.size()) != grid_.size() * ls_.num_intervals())
    throw ArgumentError("dataterm volume needs exactly one piece per (pixel, interval)");
}

double DatatermVolume::eval(Index pixel, double gamma) const {
  const auto& g = ls_.labels();
  if (gamma < g.front() || gamma > g.back()) return std::numeric_limits<double>::infinity();
  auto it = std::upper_bound(g.begin(), g.end(), gamma);
  Index i = static_cast<Index>(it - g.begin()) - 1;
  i = std::clamp<Index>(i, 0, num_intervals() - 1);
  return piece_eval(piece(pixel, i), std::clamp(gamma, ls_.lower(i), ls_.upper(i)));
}

BaselineCosts::BaselineCosts(GridShape g, LabelSpace l, Eigen::MatrixXd c)
    : grid(g), ls(std::move(l)), costs(std::move(c)) {
  if (costs.rows() != ls.num_labels() || costs.cols() != grid.size())
    throw ArgumentError("baseline costs must be an L x N matrix");
  if (!costs.allFinite()) throw InputError("baseline costs must be finite");
}

double BaselineCosts::eval(Index pixel, double gamma) const {
  const auto& g = ls.labels();
  if (gamma < g.front() || gamma > g.back()) return std::numeric_limits<double>::infinity();
  auto it = std::upper_bound(g.begin(), g.end(), gamma);
  Index i = std::clamp<Index>(static_cast<Index>(it - g.begin()) - 1, 0, ls.num_intervals() - 1);
  const double t = (gamma - ls.lower(i)) / ls.width(i);
  return (1.0 - t) * costs(i, pixel) + t * costs(i + 1, pixel);
}

Eigen::MatrixXd baseline_r(const BaselineCosts& bc) {
  const Index k = bc.ls.num_intervals();
  return bc.costs.bottomRows(k) - bc.costs.topRows(k);
}

double baseline_dataterm(const BaselineCosts& bc, Index pixel, const Eigen::VectorXd& u) {
  const Index k = bc.ls.num_intervals();
  const Eigen::VectorXd r = bc.costs.col(pixel).tail(k) - bc.costs.col(pixel).head(k);
  return bc.costs(0, pixel) + u.dot(r);
}

BaselineCosts sample_label_costs(GridShape grid, const LabelSpace& ls, const CostFunction& cost) {
  Eigen::MatrixXd c(ls.num_labels(), grid.size());
  for (Index n = 0; n < grid.size(); ++n)
    for (Index l = 0; l < ls.num_labels(); ++l) {
      const double v = cost(n, ls.label(l));
      if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "non-finite cost at pixel " << n << ", label " << ls.label(l);
        throw InputError(os.str());
      }
      c(l, n) = v;
    }
  return BaselineCosts(grid, ls, std::move(c));
}

DatatermVolume sample_costs(GridShape grid, const LabelSpace& ls, const CostFunction& cost, int sublabels) {
  if (sublabels < 2) throw ArgumentError("sample_costs: need at least 2 sublabel samples per interval");
  const Index k = ls.num_intervals();
  std::vector<ConvexPiece> pieces;
  pieces.reserve(static_cast<std::size_t>(grid.size() * k));
  std::vector<double> gs(static_cast<std::size_t>(sublabels) + 1);
  std::vector<double> cs(gs.size());
  for (Index n = 0; n < grid.size(); ++n) {
    for (Index i = 0; i < k; ++i) {
      for (int j = 0; j <= sublabels; ++j) {
        const double g = j == sublabels ? ls.upper(i) : ls.lower(i) + ls.width(i) * j / sublabels;
        const double c = cost(n, g);
        if (!std::isfinite(c)) {
          std::ostringstream os;
          os << "non-finite cost at pixel " << n << ", gamma " << g;
          throw InputError(os.str());
        }
        gs[static_cast<std::size_t>(j)] = g;
        cs[static_cast<std::size_t>(j)] = c;
      }
      pieces.emplace_back(convexify_interval(gs, cs));
    }
  }
  return DatatermVolume(grid, ls, std::move(pieces));
}

DatatermVolume piecewise_linear_volume(const BaselineCosts& bc) {
  const Index k = bc.ls.num_intervals();
  std::vector<ConvexPiece> pieces;
  pieces.reserve(static_cast<std::size_t>(bc.grid.size() * k));
  for (Index n = 0; n < bc.grid.size(); ++n)
    for (Index i = 0; i < k; ++i)
      pieces.emplace_back(PolyLinePiece{{bc.ls.lower(i), bc.ls.upper(i)}, {bc.costs(i, n), bc.costs(i + 1, n)}});
  return DatatermVolume(bc.grid, bc.ls, std::move(pieces));
}

}  // namespace sublift
