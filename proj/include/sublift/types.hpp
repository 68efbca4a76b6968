#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "sublift/errors.hpp"

namespace sublift {

using Index = Eigen::Index;

// Spatial discretization: a width x height Cartesian grid, row-major pixel
// numbering (pixel = y * width + x).
struct GridShape {
  Index width = 1;
  Index height = 1;

  GridShape() = default;
  GridShape(Index w, Index h) : width(w), height(h) {
    if (w < 1 || h < 1) throw ArgumentError("grid dimensions must be >= 1");
  }

  Index size() const { return width * height; }
  Index pixel(Index x, Index y) const { return y * width + x; }
  static constexpr int dims = 2;

  friend bool operator==(const GridShape&, const GridShape&) = default;
};

// Ordered label grid gamma_1 < ... < gamma_L splitting the range into
// k = L - 1 intervals [gamma_i, gamma_{i+1}].
class LabelSpace {
 public:
  explicit LabelSpace(std::vector<double> gammas);

  // L equispaced labels on [lo, hi].
  static LabelSpace uniform(double lo, double hi, Index num_labels);

  Index num_labels() const { return static_cast<Index>(gammas_.size()); }
  Index num_intervals() const { return num_labels() - 1; }

  // 0-based: label(0) is the lower end of the range.
  double label(Index i) const { return gammas_[static_cast<std::size_t>(i)]; }
  double lower(Index interval) const { return label(interval); }
  double upper(Index interval) const { return label(interval + 1); }
  double width(Index interval) const { return upper(interval) - lower(interval); }

  double min() const { return gammas_.front(); }
  double max() const { return gammas_.back(); }

  const std::vector<double>& labels() const { return gammas_; }

 private:
  std::vector<double> gammas_;
};

// One real value per pixel.
struct ScalarField {
  GridShape grid;
  Eigen::VectorXd values;

  ScalarField() = default;
  explicit ScalarField(GridShape g) : grid(g), values(Eigen::VectorXd::Zero(g.size())) {}
  ScalarField(GridShape g, Eigen::VectorXd v);

  double& operator()(Index x, Index y) { return values[grid.pixel(x, y)]; }
  double operator()(Index x, Index y) const { return values[grid.pixel(x, y)]; }
};

// One vector in R^k per pixel, stored as a k x N column-major matrix so each
// pixel's vector is contiguous.
struct LiftedField {
  GridShape grid;
  Eigen::MatrixXd values;

  LiftedField() = default;
  LiftedField(GridShape g, Index k) : grid(g), values(Eigen::MatrixXd::Zero(k, g.size())) {}

  Index num_intervals() const { return values.rows(); }
  auto pixel(Index n) { return values.col(n); }
  auto pixel(Index n) const { return values.col(n); }
};

}  // namespace sublift
