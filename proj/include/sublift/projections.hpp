#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "sublift/pieces.hpp"
#include "sublift/types.hpp"

namespace sublift {

enum class RegularizerKind { Isotropic, Anisotropic };

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1>
proj_ball_l2(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar radius) {
  using Scalar = typename Derived::Scalar;
  const Scalar norm = x.norm();
  if (norm <= radius) return x;
  if (radius <= Scalar(0)) return Eigen::Matrix<Scalar, Derived::RowsAtCompileTime, 1>::Zero(x.size());
  return x * (radius / norm);
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Derived::RowsAtCompileTime, 1>
proj_ball_linf(const Eigen::MatrixBase<Derived>& x, typename Derived::Scalar radius) {
  return x.cwiseMax(-radius).cwiseMin(radius);
}

// Projection onto {1 >= u_1 >= ... >= u_k >= 0}: pool-adjacent-violators for
// the nonincreasing order, then clamping to [0, 1].
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>
proj_monotone_box(const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  const Index k = u.size();
  struct Block {
    Scalar sum;
    Index count;
    Scalar mean() const { return sum / static_cast<Scalar>(count); }
  };
  std::vector<Block> blocks;
  blocks.reserve(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) {
    blocks.push_back({u[i], 1});
    while (blocks.size() > 1 && blocks[blocks.size() - 2].mean() < blocks.back().mean()) {
      const Block top = blocks.back();
      blocks.pop_back();
      blocks.back().sum += top.sum;
      blocks.back().count += top.count;
    }
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(k);
  Index pos = 0;
  for (const Block& b : blocks) {
    const Scalar m = std::clamp(b.mean(), Scalar(0), Scalar(1));
    out.segment(pos, b.count).setConstant(m);
    pos += b.count;
  }
  return out;
}

// Row i of a pixel's k x d dual matrix is projected onto the ball of radius
// scale * (gamma_{i+1} - gamma_i); l2 rows for isotropic TV, l-inf for
// anisotropic TV.
template <typename Derived>
void proj_K_inplace(Eigen::MatrixBase<Derived>& P, const LabelSpace& ls, RegularizerKind kind,
                    double scale = 1.0) {
  using Scalar = typename Derived::Scalar;
  for (Index i = 0; i < P.rows(); ++i) {
    const Scalar r = static_cast<Scalar>(scale * ls.width(i));
    if (kind == RegularizerKind::Isotropic) {
      const Scalar norm = P.row(i).norm();
      if (norm > r) P.row(i) *= (norm > Scalar(0) ? r / norm : Scalar(0));
    } else {
      P.row(i) = P.row(i).cwiseMax(-r).cwiseMin(r);
    }
  }
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
proj_K(const Eigen::MatrixBase<Derived>& P, const LabelSpace& ls, RegularizerKind kind,
       double scale = 1.0) {
  if (P.rows() != ls.num_intervals()) throw ArgumentError("proj_K: matrix must have k rows");
  Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> out = P;
  proj_K_inplace(out, ls, kind, scale);
  return out;
}

// Nearest point of {(x, y) : y >= a x^2}, a > 0. Outside points land on the
// parabola at the unique root of 2a^2 t^3 + (1 - 2 a y) t - x = 0 lying
// between 0 and x, found by Newton steps safeguarded by bisection.
template <typename Scalar>
Eigen::Matrix<Scalar, 2, 1> proj_parabola_epigraph(const Eigen::Matrix<Scalar, 2, 1>& point, Scalar a) {
  const Scalar x = point[0];
  const Scalar y = point[1];
  if (y >= a * x * x) return point;
  if (x == Scalar(0)) return {Scalar(0), std::max(y, Scalar(0))};
  const Scalar c1 = Scalar(2) * a * a;
  const Scalar c0 = Scalar(1) - Scalar(2) * a * y;
  // g is increasing on the bracket: g(0) = -x and g(x) = 2 a x (a x^2 - y).
  Scalar lo = std::min(Scalar(0), x);
  Scalar hi = std::max(Scalar(0), x);
  Scalar t = x;
  for (int it = 0; it < 60; ++it) {
    const Scalar g = (c1 * t * t + c0) * t - x;
    if (g == Scalar(0)) break;
    if (g < Scalar(0)) lo = t; else hi = t;
    const Scalar dg = Scalar(3) * c1 * t * t + c0;
    Scalar next = dg > Scalar(0) ? t - g / dg : Scalar(0.5) * (lo + hi);
    if (!(next > lo && next < hi)) next = Scalar(0.5) * (lo + hi);
    const bool done = std::abs(next - t) <= std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + std::abs(t));
    t = next;
    if (done || hi - lo <= std::numeric_limits<Scalar>::epsilon() * (Scalar(1) + std::abs(t))) break;
  }
  return {t, a * t * t};
}

// Projection onto the epigraph {(t, z) : z >= rho_i^*(t)} of the conjugate of a
// convex piece.
Eigen::Vector2d proj_conjugate_epigraph(const ConvexPiece& piece, const Eigen::Vector2d& point);

// Polyline case: the conjugate is max_m (gamma_m t - rho_m), a convex
// piecewise-linear function with slopes gamma_m.
Eigen::Vector2d proj_polyline_conjugate_epigraph(const PolyLinePiece& piece, const Eigen::Vector2d& point);

// Quadratic case: a parabola with two tangent rays (the interval clamps the
// maximizer of the conjugate).
Eigen::Vector2d proj_quadratic_conjugate_epigraph(const QuadraticPiece& piece, const Eigen::Vector2d& point);

// Projection onto the scaled epigraph {(v, z) : z / w >= rho_i^*(v / w)}, w > 0.
inline Eigen::Vector2d proj_scaled_conjugate_epigraph(const ConvexPiece& piece, const Eigen::Vector2d& point,
                                                      double w) {
  return w * proj_conjugate_epigraph(piece, point / w);
}

}  // namespace sublift
