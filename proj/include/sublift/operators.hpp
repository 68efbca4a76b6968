#pragma once

#include <Eigen/Core>

#include "sublift/types.hpp"

namespace sublift {

// Forward differences along x and y with Neumann boundary (zero difference
// in the last column / row). Each column of `u` is one pixel's vector; the
// outputs have the same k x N shape.
template <typename DerivedU, typename DerivedG>
void grad(const GridShape& grid, const Eigen::MatrixBase<DerivedU>& u, Eigen::MatrixBase<DerivedG>& gx,
          Eigen::MatrixBase<DerivedG>& gy) {
  const Index W = grid.width;
  const Index H = grid.height;
  for (Index y = 0; y < H; ++y) {
    for (Index x = 0; x < W; ++x) {
      const Index n = grid.pixel(x, y);
      if (x + 1 < W) gx.col(n) = u.col(n + 1) - u.col(n); else gx.col(n).setZero();
      if (y + 1 < H) gy.col(n) = u.col(n + W) - u.col(n); else gy.col(n).setZero();
    }
  }
}

// Negative adjoint of grad: <grad u, p> = -<u, div p>.
template <typename DerivedP, typename DerivedD>
void div(const GridShape& grid, const Eigen::MatrixBase<DerivedP>& px, const Eigen::MatrixBase<DerivedP>& py,
         Eigen::MatrixBase<DerivedD>& out) {
  const Index W = grid.width;
  const Index H = grid.height;
  for (Index y = 0; y < H; ++y) {
    for (Index x = 0; x < W; ++x) {
      const Index n = grid.pixel(x, y);
      auto d = out.col(n);
      d.setZero();
      if (x + 1 < W) d += px.col(n);
      if (x > 0) d -= px.col(n - 1);
      if (y + 1 < H) d += py.col(n);
      if (y > 0) d -= py.col(n - W);
    }
  }
}

// Number of forward-difference stencils pixel (x, y) takes part in (0..4).
inline int stencil_count(const GridShape& grid, Index x, Index y) {
  return (x + 1 < grid.width) + (x > 0) + (y + 1 < grid.height) + (y > 0);
}

}  // namespace sublift
