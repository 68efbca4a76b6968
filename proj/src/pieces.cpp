#include "sublift/pieces.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace sublift {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

QuadraticPiece quadratic_piece(double a, double b, double c, double lo, double hi) {
  if (!(std::isfinite(a) && std::isfinite(b) && std::isfinite(c)))
    throw InputError("quadratic piece coefficients must be finite");
  if (a < 0.0) {
    std::ostringstream os;
    os << "quadratic piece is concave (a = " << a << ")";
    throw ConvexityError(os.str());
  }
  if (!(lo < hi)) throw ArgumentError("quadratic piece needs lo < hi");
  return {a, b, c, lo, hi};
}

PolyLinePiece polyline_piece(std::vector<double> gammas, std::vector<double> values) {
  if (gammas.size() != values.size()) throw ArgumentError("polyline: vertex arrays differ in length");
  if (gammas.size() < 2) throw ArgumentError("polyline needs at least 2 vertices");
  for (std::size_t m = 0; m < gammas.size(); ++m) {
    if (!std::isfinite(gammas[m]) || !std::isfinite(values[m])) throw InputError("polyline vertices must be finite");
    if (m > 0 && !(gammas[m - 1] < gammas[m])) throw ArgumentError("polyline abscissae must be strictly ascending");
  }
  PolyLinePiece p{std::move(gammas), std::move(values)};
  for (std::size_t m = 1; m + 1 < p.size(); ++m) {
    const double s0 = p.slope(m - 1);
    const double s1 = p.slope(m);
    if (s1 < s0 - 1e-9 * (1.0 + std::abs(s0) + std::abs(s1)))
      throw ConvexityError("polyline slopes must be nondecreasing");
  }
  return p;
}

double piece_lower(const ConvexPiece& piece) {
  return std::visit(overloaded{[](const QuadraticPiece& q) { return q.lo; },
                               [](const PolyLinePiece& p) { return p.lo(); }},
                    piece);
}

double piece_upper(const ConvexPiece& piece) {
  return std::visit(overloaded{[](const QuadraticPiece& q) { return q.hi; },
                               [](const PolyLinePiece& p) { return p.hi(); }},
                    piece);
}

double piece_eval(const ConvexPiece& piece, double g) {
  return std::visit(
      overloaded{[g](const QuadraticPiece& q) { return (g < q.lo || g > q.hi) ? kInf : q(g); },
                 [g](const PolyLinePiece& p) {
                   if (g < p.lo() || g > p.hi()) return kInf;
                   auto it = std::upper_bound(p.gammas.begin(), p.gammas.end(), g);
                   std::size_t m = static_cast<std::size_t>(it - p.gammas.begin());
                   if (m >= p.size()) return p.values.back();
                   m = std::max<std::size_t>(m, 1) - 1;
                   const double t = (g - p.gammas[m]) / (p.gammas[m + 1] - p.gammas[m]);
                   return (1.0 - t) * p.values[m] + t * p.values[m + 1];
                 }},
      piece);
}

std::pair<double, double> piece_slope_range(const ConvexPiece& piece) {
  return std::visit(overloaded{[](const QuadraticPiece& q) {
                                 return std::pair{2.0 * q.a * q.lo + q.b, 2.0 * q.a * q.hi + q.b};
                               },
                               [](const PolyLinePiece& p) {
                                 return std::pair{p.slope(0), p.slope(p.size() - 2)};
                               }},
                    piece);
}

double conjugate_eval(const QuadraticPiece& q, double t) {
  if (q.a > 0.0) {
    const double g = std::clamp((t - q.b) / (2.0 * q.a), q.lo, q.hi);
    return t * g - q(g);
  }
  return std::max(t * q.lo - q(q.lo), t * q.hi - q(q.hi));
}

double conjugate_eval(const PolyLinePiece& p, double t) {
  double best = -kInf;
  for (std::size_t m = 0; m < p.size(); ++m) best = std::max(best, t * p.gammas[m] - p.values[m]);
  return best;
}

double conjugate_eval(const ConvexPiece& piece, double t) {
  return std::visit([t](const auto& p) { return conjugate_eval(p, t); }, piece);
}

}  // namespace sublift
