#pragma once

#include <variant>
#include <vector>

#include "sublift/cost_volume.hpp"
#include "sublift/dataterm.hpp"
#include "sublift/projections.hpp"
#include "sublift/types.hpp"

namespace sublift {

// rho(x, g) = (g - f(x))^2. f is clamped into the label range.
DatatermVolume build_rof(const ScalarField& f, const LabelSpace& ls);
CostFunction rof_cost(const ScalarField& f, const LabelSpace& ls);

// rho(x, g) = alpha / 2 * min((g - f(x))^2, nu), convexified per interval from
// S + 1 samples.
DatatermVolume build_trunc_quad(const ScalarField& f, double alpha, double nu, const LabelSpace& ls,
                                int sublabels = kDefaultSublabels);
CostFunction trunc_quad_cost(const ScalarField& f, double alpha, double nu);

struct StereoOptions {
  int min_disparity = 0;
  int max_disparity = 16;
  int patch = 4;
  // Per-sample truncation of the l1 gradient difference.
  double truncation = 0.5;
};

// cost(x, d) = sum over a patch x patch window of
// min(|grad I_L(p) - grad I_R(p - d e_x)|_1, truncation), central-difference
// gradients, coordinates clamped at the border. Samples are the integer
// disparities min_disparity..max_disparity.
CostVolume build_stereo_cost(const ScalarField& left, const ScalarField& right, const StereoOptions& opt);

// Squared distance on the circle of circumference 2 pi.
double circular_distance_sq(double a, double b);

// rho(x, g) = d_S1(g, f(x))^2 with f in [0, 2 pi). Intervals covered by a
// single 2 pi branch get the exact quadratic; intervals that contain a branch
// switch get a polyline of supporting lines of the local convex envelope.
DatatermVolume build_unwrap(const ScalarField& wrapped, const LabelSpace& ls, int sublabels = kDefaultSublabels);
CostFunction unwrap_cost(const ScalarField& wrapped);

// Windowed modified-Laplacian contrast per frame; cost = max contrast over the
// stack minus the frame's contrast, labels are the frame indices 0..M-1.
CostVolume build_dff_cost(const std::vector<ScalarField>& stack, int window = 3);

// Linear interpolation of a cost volume.
CostFunction cost_volume_cost(const CostVolume& cv);

struct RofParams {
  ScalarField f;
};
struct TruncQuadParams {
  ScalarField f;
  double alpha = 25.0;
  double nu = 0.025;
};
struct StereoParams {
  CostVolume costs;
};
struct UnwrapParams {
  ScalarField wrapped;
};
struct DffParams {
  CostVolume costs;
};

// A complete instance: application data plus label space, weight and
// regularizer.
struct ProblemSpec {
  std::variant<RofParams, TruncQuadParams, StereoParams, UnwrapParams, DffParams> data;
  LabelSpace ls;
  double lambda = 1.0;
  RegularizerKind regularizer = RegularizerKind::Isotropic;
  int sublabels = kDefaultSublabels;

  void validate() const;
  GridShape grid() const;
  // The (nonconvex) rho used for reporting energies.
  CostFunction cost() const;
  DatatermVolume sublabel_dataterm() const;
  BaselineCosts baseline_costs() const;
};

}  // namespace sublift
