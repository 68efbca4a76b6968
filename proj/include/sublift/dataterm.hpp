#pragma once

#include <Eigen/Core>

#include <functional>
#include <span>
#include <vector>

#include "sublift/pieces.hpp"
#include "sublift/types.hpp"

namespace sublift {

// Cost rho(pixel, gamma).
using CostFunction = std::function<double(Index pixel, double gamma)>;

// Lower convex hull (monotone chain) of samples sorted by gamma. Collinear
// interior vertices are dropped.
PolyLinePiece convexify_interval(std::span<const double> gammas, std::span<const double> costs);

// bold-rho_i^*(v) = <1_{i-1}, v> - gamma_i v_i / w_i + rho_i^*(v_i / w_i),
// interval index 0-based.
template <typename Derived>
double lifted_conjugate_eval(const LabelSpace& ls, std::span<const ConvexPiece> pieces,
                             const Eigen::MatrixBase<Derived>& v, Index interval) {
  if (interval < 0 || interval >= ls.num_intervals()) throw ArgumentError("interval index out of range");
  const double w = ls.width(interval);
  const double offset = v.head(interval).sum() - ls.lower(interval) * v[interval] / w;
  return offset + conjugate_eval(pieces[static_cast<std::size_t>(interval)], v[interval] / w);
}

// Per-pixel, per-interval convex pieces: pieces[pixel * k + interval].
class DatatermVolume {
 public:
  DatatermVolume(GridShape grid, LabelSpace ls, std::vector<ConvexPiece> pieces);

  const GridShape& grid() const { return grid_; }
  const LabelSpace& labels() const { return ls_; }
  Index num_intervals() const { return ls_.num_intervals(); }

  const ConvexPiece& piece(Index pixel, Index interval) const {
    return pieces_[static_cast<std::size_t>(pixel * num_intervals() + interval)];
  }
  std::span<const ConvexPiece> pixel_pieces(Index pixel) const {
    return {pieces_.data() + pixel * num_intervals(), static_cast<std::size_t>(num_intervals())};
  }
  std::size_t piece_count() const { return pieces_.size(); }

  // Convexified cost at gamma: the piece of the interval containing gamma.
  double eval(Index pixel, double gamma) const;

 private:
  GridShape grid_;
  LabelSpace ls_;
  std::vector<ConvexPiece> pieces_;
};

// Label costs rho(x, gamma_i) for the classical lifting baseline, stored as an
// L x N matrix (one column per pixel).
struct BaselineCosts {
  GridShape grid;
  LabelSpace ls;
  Eigen::MatrixXd costs;

  BaselineCosts(GridShape g, LabelSpace l, Eigen::MatrixXd c);

  // Piecewise-linear interpolation of the label costs.
  double eval(Index pixel, double gamma) const;
};

// r_i = rho(gamma_{i+1}) - rho(gamma_i), as a k x N matrix.
Eigen::MatrixXd baseline_r(const BaselineCosts& bc);

// rho(gamma_1) + <u, r> for one pixel.
double baseline_dataterm(const BaselineCosts& bc, Index pixel, const Eigen::VectorXd& u);

BaselineCosts sample_label_costs(GridShape grid, const LabelSpace& ls, const CostFunction& cost);

inline constexpr int kDefaultSublabels = 8;

// Samples S + 1 equispaced points per interval (endpoints included) and
// convexifies each interval.
DatatermVolume sample_costs(GridShape grid, const LabelSpace& ls, const CostFunction& cost,
                            int sublabels = kDefaultSublabels);

// Affine pieces through the label costs (piecewise-linear dataterm).
DatatermVolume piecewise_linear_volume(const BaselineCosts& bc);

}  // namespace sublift
