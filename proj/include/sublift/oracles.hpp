#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <span>
#include <utility>
#include <vector>

#include "sublift/dataterm.hpp"
#include "sublift/projections.hpp"
#include "sublift/types.hpp"

namespace sublift {

// A function tabulated on an ascending grid of gamma values.
struct SampledFunction {
  std::vector<double> gammas;
  std::vector<double> values;

  // Uniform samples of fn on [lo, hi] with step close to h (endpoints included).
  static SampledFunction tabulate(const std::function<double(double)>& fn, double lo, double hi, double h);
  double step() const { return gammas.size() > 1 ? gammas[1] - gammas[0] : 0.0; }
};

// max over samples of t * gamma - value.
double brute_conjugate(const SampledFunction& sf, double t);

struct EnvelopeSearch {
  int resolution = 401;   // grid points per axis
  int refine_rounds = 60;  // pattern-search rounds after the grid
};

// Grid search of sup_v <u, v> - max_i bold-rho_i^*(v) over a box derived from
// the pieces' slopes, followed by a local pattern search. Lower bound on the
// lifted biconjugate; k <= 3 only.
double brute_lifted_envelope(const LabelSpace& ls, std::span<const ConvexPiece> pieces, const Eigen::VectorXd& u,
                             const EnvelopeSearch& search = {});

// Grid step of the coarse v-grid along axis `interval`.
double envelope_grid_step(const LabelSpace& ls, std::span<const ConvexPiece> pieces, Index interval,
                          const EnvelopeSearch& search = {});

struct OracleReport {
  int trials = 0;
  double max_deviation = 0.0;
  // Largest deviation / tolerance ratio seen; <= 1 means every trial passed.
  double worst_ratio = 0.0;
  int failures = 0;

  bool passed() const { return failures == 0; }
};

// Affine pieces through label_costs: brute envelope against
// rho(gamma_1) + <u, r> for random feasible u, tolerance 2 * h * |u|_1
// (h = coarsest v-grid step).
OracleReport check_prop3(const LabelSpace& ls, const std::vector<double>& label_costs, int trials,
                         std::uint64_t seed = 1, const EnvelopeSearch& search = {});

// Binary case: brute envelope against piece(gamma_1 + u (gamma_2 - gamma_1))
// for random u in [0, 1], tolerance h * (1 + |u|).
OracleReport check_prop4(const LabelSpace& ls, const ConvexPiece& piece, int trials, std::uint64_t seed = 1,
                         const EnvelopeSearch& search = {});

struct KReport {
  int samples = 0;
  double worst_margin = 0.0;  // min over samples of rhs - lhs
  int violations = 0;         // samples with margin < -1e-10
  std::vector<Index> witness_failures;  // rows failing the i = j, alpha = 1, beta = 0 witness
};

// Samples random (i <= j, alpha, beta) and evaluates
// |P^T (1_i^alpha - 1_j^beta)| <= |gamma_i^alpha - gamma_j^beta| (l2 for
// isotropic, l-inf for anisotropic), plus the deterministic per-row witness.
KReport check_K_equivalence(const Eigen::MatrixXd& P, const LabelSpace& ls, int trials, std::uint64_t seed = 1,
                            RegularizerKind kind = RegularizerKind::Isotropic);

// Two-pixel ROF (u0 - f0)^2 + (u1 - f1)^2 + lambda |u0 - u1|, closed form.
std::pair<double, double> two_pixel_rof(double f0, double f1, double lambda);

struct DirectOptions {
  int max_iters = 20000;
  double tol = 1e-10;  // max |u^{n+1} - u^n|
};

// Unlifted primal-dual solver for sum_x piece_x(u(x)) + lambda TV(u), one
// convex piece per pixel covering the whole range. Accelerated when every
// piece is strictly convex quadratic.
ScalarField solve_direct(GridShape grid, std::span<const ConvexPiece> pieces, double lambda, RegularizerKind kind,
                         const DirectOptions& opt = {});

struct VerifyEntry {
  std::string name;
  double value = 0.0;      // worst deviation, or negated worst margin
  double tolerance = 0.0;
  bool passed = false;
};

struct VerifyReport {
  std::vector<VerifyEntry> entries;

  bool passed() const;
  void write_text(std::ostream& os) const;
  void write_csv(std::ostream& os) const;
  void write_csv(const std::filesystem::path& path) const;
};

// Runs every oracle check with fixed seeds.
VerifyReport run_verification(std::uint64_t seed = 1);

}  // namespace sublift
