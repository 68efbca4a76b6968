#include "sublift/projections.hpp"

#include <limits>

namespace sublift {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Candidate {
  Eigen::Vector2d point;
  double dist2 = kInf;
};

// Nearest point of the line z = slope * t - offset restricted to t in [t_min, t_max].
Candidate project_onto_ray(const Eigen::Vector2d& p, double slope, double offset, double t_min, double t_max) {
  double tau = (p[0] + slope * (p[1] + offset)) / (1.0 + slope * slope);
  tau = std::clamp(tau, t_min, t_max);
  const Eigen::Vector2d q(tau, slope * tau - offset);
  return {q, (q - p).squaredNorm()};
}

}  // namespace

Eigen::Vector2d proj_polyline_conjugate_epigraph(const PolyLinePiece& piece, const Eigen::Vector2d& point) {
  if (point[1] >= conjugate_eval(piece, point[0])) return point;

  // Line m (slope gamma_m, offset rho_m) is active between the chord slopes
  // of the neighbouring segments.
  const std::size_t M = piece.size();
  Candidate best;
  for (std::size_t m = 0; m < M; ++m) {
    const double t_min = m == 0 ? -kInf : piece.slope(m - 1);
    const double t_max = m + 1 == M ? kInf : piece.slope(m);
    Candidate c = project_onto_ray(point, piece.gammas[m], piece.values[m], t_min, t_max);
    if (c.dist2 < best.dist2) best = c;
  }
  best.point[1] = std::max(best.point[1], conjugate_eval(piece, best.point[0]));
  return best.point;
}

Eigen::Vector2d proj_quadratic_conjugate_epigraph(const QuadraticPiece& q, const Eigen::Vector2d& point) {
  if (q.a <= 0.0) return proj_polyline_conjugate_epigraph(polyline_piece({q.lo, q.hi}, {q(q.lo), q(q.hi)}), point);

  if (point[1] >= conjugate_eval(q, point[0])) return point;

  const double t_lo = 2.0 * q.a * q.lo + q.b;
  const double t_hi = 2.0 * q.a * q.hi + q.b;

  // Middle part: z = (t - b)^2 / (4a) - c on [t_lo, t_hi].
  const double curvature = 1.0 / (4.0 * q.a);
  Eigen::Vector2d shifted(point[0] - q.b, point[1] + q.c);
  Eigen::Vector2d arc = proj_parabola_epigraph<double>(shifted, curvature);
  const double x = std::clamp(arc[0], t_lo - q.b, t_hi - q.b);
  Candidate best;
  best.point = Eigen::Vector2d(x + q.b, curvature * x * x - q.c);
  best.dist2 = (best.point - point).squaredNorm();

  Candidate left = project_onto_ray(point, q.lo, q(q.lo), -kInf, t_lo);
  if (left.dist2 < best.dist2) best = left;
  Candidate right = project_onto_ray(point, q.hi, q(q.hi), t_hi, kInf);
  if (right.dist2 < best.dist2) best = right;

  best.point[1] = std::max(best.point[1], conjugate_eval(q, best.point[0]));
  return best.point;
}

Eigen::Vector2d proj_conjugate_epigraph(const ConvexPiece& piece, const Eigen::Vector2d& point) {
  if (const auto* q = std::get_if<QuadraticPiece>(&piece)) return proj_quadratic_conjugate_epigraph(*q, point);
  return proj_polyline_conjugate_epigraph(std::get<PolyLinePiece>(piece), point);
}

}  // namespace sublift
