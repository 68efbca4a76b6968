#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "sublift/dataterm.hpp"
#include "sublift/projections.hpp"
#include "sublift/types.hpp"

namespace sublift {

enum class Method { Sublabel, Baseline };

struct SolverConfig {
  int max_iters = 20000;
  int check_every = 50;
  // Stop once max(primal, dual) RMS residual drops below this.
  double stop_tol = 1e-6;
  double lambda = 1.0;
  // Diagonal preconditioning exponent: sigma_row = 1 / sum |K_row|^alpha,
  // tau_col = 1 / sum |K_col|^(2 - alpha).
  double precond_alpha = 1.0;
  // Column scale of the multiplier s_i is multiplier_scale / w_i; 0 leaves it unscaled.
  double multiplier_scale = 3.0;
  // Row scale of the gradient duals; 0 selects min(1, lambda).
  double tv_scale = 0.0;
  // Residual-balancing step adaptation.
  bool adaptive = false;
  RegularizerKind regularizer = RegularizerKind::Isotropic;
  // Fixed-order reductions and no wall-clock values in the log.
  bool deterministic = true;

  void validate() const;
  double effective_tv_scale() const { return tv_scale > 0.0 ? tv_scale : std::min(1.0, lambda); }
};

struct EnergyRecord {
  int iteration = 0;
  double energy = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double seconds = 0.0;
};

struct EnergyLog {
  std::vector<EnergyRecord> records;

  const EnergyRecord& last() const { return records.back(); }
  void write_csv(std::ostream& os) const;
  void write_csv(const std::filesystem::path& path) const;
};

// Dual and auxiliary unknowns of the sublabel saddle-point problem. The
// Lagrange multiplier s of the z-equality is the one entry updated in the
// descent half-step. The baseline only uses px, py.
struct DualState {
  Eigen::MatrixXd v;   // k x N, dataterm dual
  Eigen::VectorXd q;   // N, replaces the max over the interval conjugates
  Eigen::MatrixXd px;  // k x N, regularizer dual (x component)
  Eigen::MatrixXd py;  // k x N, regularizer dual (y component)
  Eigen::MatrixXd z;   // k x N, scaled epigraph variable
  Eigen::MatrixXd s;   // k x N, multiplier of the z equality
};

struct SolveResult {
  LiftedField u;
  DualState state;
  EnergyLog log;
  int iterations = 0;
  bool converged = false;
};

class DivergenceError : public Error {
 public:
  DivergenceError(int iteration, EnergyLog log);
  int iteration() const { return iteration_; }
  const EnergyLog& log() const { return log_; }

 private:
  int iteration_;
  EnergyLog log_;
};

// Sublabel-accurate relaxation. `energy_cost` is the rho used for the logged
// unlifted energy; it defaults to the volume's convexified pieces.
SolveResult solve_sublabel(const DatatermVolume& dt, const SolverConfig& cfg, const CostFunction& energy_cost = {});

// Classical lifting with the piecewise-linear dataterm rho(gamma_1) + <u, r>.
// `energy_cost` defaults to linear interpolation of the label costs.
SolveResult solve_baseline(const BaselineCosts& bc, const SolverConfig& cfg, const CostFunction& energy_cost = {});

double total_variation(const ScalarField& u, RegularizerKind kind);

// sum_x rho(x, u(x)) + lambda * TV(u).
double energy_scalar(const CostFunction& rho, const ScalarField& u, double lambda, RegularizerKind kind);

// Energy of unlift_field(u).
double energy_unlifted(const CostFunction& rho, const LabelSpace& ls, const LiftedField& u, double lambda,
                       RegularizerKind kind);

// Lifted TV: lambda * sum_x sum_i w_i |(grad u)_i(x)| (l2 or l1 row norm).
double lifted_total_variation(const LabelSpace& ls, const LiftedField& u, RegularizerKind kind);

// Relaxed (lifted) objective for a piecewise-linear dataterm at the
// monotone-box projection of u.
double relaxed_linear_energy(const BaselineCosts& bc, const LiftedField& u, double lambda, RegularizerKind kind);

// Optimization variable counts: 4N(L-1) for the baseline, 6N(L-1) + N for the
// sublabel method.
long long variable_count(const GridShape& grid, Index num_labels, Method method);

}  // namespace sublift
