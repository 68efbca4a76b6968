#pragma once

#include <Eigen/Core>

#include <variant>
#include <vector>

#include "sublift/errors.hpp"

namespace sublift {

// a*g^2 + b*g + c restricted to [lo, hi], a >= 0.
struct QuadraticPiece {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double lo = 0.0;
  double hi = 1.0;

  double operator()(double g) const { return (a * g + b) * g + c; }
};

// Convex piecewise-linear function through (gammas[m], values[m]); the first
// and last abscissae are the interval endpoints.
struct PolyLinePiece {
  std::vector<double> gammas;
  std::vector<double> values;

  std::size_t size() const { return gammas.size(); }
  double lo() const { return gammas.front(); }
  double hi() const { return gammas.back(); }
  // Slope of segment m (between vertices m and m + 1).
  double slope(std::size_t m) const {
    return (values[m + 1] - values[m]) / (gammas[m + 1] - gammas[m]);
  }
};

// rho_i = rho + indicator of the interval, in one of the two supported forms.
using ConvexPiece = std::variant<QuadraticPiece, PolyLinePiece>;

QuadraticPiece quadratic_piece(double a, double b, double c, double lo, double hi);

// Validates ordering and convexity of the vertex list.
PolyLinePiece polyline_piece(std::vector<double> gammas, std::vector<double> values);

double piece_lower(const ConvexPiece& piece);
double piece_upper(const ConvexPiece& piece);

// Value at g; +infinity outside the piece's interval.
double piece_eval(const ConvexPiece& piece, double g);

// Range [min, max] of (sub)derivatives over the interval.
std::pair<double, double> piece_slope_range(const ConvexPiece& piece);

// rho_i^*(t) = sup_{g in interval} t*g - rho_i(g).
double conjugate_eval(const QuadraticPiece& piece, double t);
double conjugate_eval(const PolyLinePiece& piece, double t);
double conjugate_eval(const ConvexPiece& piece, double t);

}  // namespace sublift
