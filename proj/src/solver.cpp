#include "sublift/solver.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

#include "sublift/lifting.hpp"
#include "sublift/operators.hpp"

namespace sublift {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

void SolverConfig::validate() const {
  if (max_iters < 1) throw ArgumentError("max_iters must be >= 1");
  if (check_every < 1) throw ArgumentError("check_every must be >= 1");
  if (!(stop_tol > 0.0)) throw ArgumentError("stop_tol must be > 0");
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ArgumentError("lambda must be > 0");
  if (!(precond_alpha >= 0.0 && precond_alpha <= 2.0)) throw ArgumentError("precond_alpha must lie in [0, 2]");
  if (!(multiplier_scale >= 0.0) || !std::isfinite(multiplier_scale)) throw ArgumentError("multiplier_scale must be >= 0");
  if (!(tv_scale >= 0.0) || !std::isfinite(tv_scale)) throw ArgumentError("tv_scale must be >= 0");
}

void EnergyLog::write_csv(std::ostream& os) const {
  os << "iter,energy,primal_res,dual_res,seconds\n";
  os << std::setprecision(17);
  for (const auto& r : records)
    os << r.iteration << ',' << r.energy << ',' << r.primal_residual << ',' << r.dual_residual << ',' << r.seconds
       << '\n';
}

void EnergyLog::write_csv(const std::filesystem::path& path) const {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  write_csv(os);
}

DivergenceError::DivergenceError(int iteration, EnergyLog log)
    : Error("solver diverged (non-finite iterate) at iteration " + std::to_string(iteration)),
      iteration_(iteration),
      log_(std::move(log)) {}

namespace {

class Stopwatch {
 public:
  explicit Stopwatch(bool enabled) : enabled_(enabled), start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    if (!enabled_) return 0.0;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

double sum_squares(const Mat& m) { return m.squaredNorm(); }

double rms(double sum_sq, Index count) { return std::sqrt(sum_sq / static_cast<double>(std::max<Index>(count, 1))); }

// The piece re-expressed over [0, w] (offset gamma_i removed), affine
// quadratics turned into two-vertex polylines.
ConvexPiece to_local(const ConvexPiece& piece, double origin, double width) {
  if (const auto* q = std::get_if<QuadraticPiece>(&piece)) {
    const double b = 2.0 * q->a * origin + q->b;
    const double c = (q->a * origin + q->b) * origin + q->c;
    if (q->a <= 0.0) return PolyLinePiece{{0.0, width}, {c, b * width + c}};
    return QuadraticPiece{q->a, b, c, 0.0, width};
  }
  PolyLinePiece p = std::get<PolyLinePiece>(piece);
  for (double& g : p.gammas) g -= origin;
  p.gammas.front() = 0.0;
  p.gammas.back() = width;
  return p;
}

// Linear operator of the sublabel saddle point, primal x = (u, s), dual
// y = (v, q, p, z):
//   <u, v> + <p, grad u> + sum_i s_i (z_i - w_i q + w_i sum_{l<i} v_l).
class SublabelOperator {
 public:
  SublabelOperator(GridShape grid, const LabelSpace& ls) : grid_(grid), w_(ls.num_intervals()) {
    for (Index i = 0; i < w_.size(); ++i) w_[i] = ls.width(i);
  }

  void apply(const Mat& u, const Mat& s, Mat& v, Vec& q, Mat& px, Mat& py, Mat& z) const {
    const Index k = w_.size();
    for (Index n = 0; n < grid_.size(); ++n) {
      double acc = 0.0;
      for (Index l = k - 1; l >= 0; --l) {
        v(l, n) = u(l, n) + acc;
        acc += w_[l] * s(l, n);
      }
      q[n] = -acc;
    }
    z = s;
    grad(grid_, u, px, py);
  }

  void apply_adjoint(const Mat& v, const Vec& q, const Mat& px, const Mat& py, const Mat& z, Mat& u, Mat& s) const {
    const Index k = w_.size();
    div(grid_, px, py, u);
    u = v - u;
    for (Index n = 0; n < grid_.size(); ++n) {
      double prefix = 0.0;
      for (Index i = 0; i < k; ++i) {
        s(i, n) = z(i, n) + w_[i] * (prefix - q[n]);
        prefix += v(i, n);
      }
    }
  }

  const Vec& widths() const { return w_; }

 private:
  GridShape grid_;
  Vec w_;
};

}  // namespace

SolveResult solve_sublabel(const DatatermVolume& dt, const SolverConfig& cfg, const CostFunction& energy_cost) {
  cfg.validate();
  const GridShape grid = dt.grid();
  const LabelSpace& ls = dt.labels();
  const Index N = grid.size();
  const Index k = ls.num_intervals();
  const double alpha = cfg.precond_alpha;
  const SublabelOperator K(grid, ls);
  const Vec& w = K.widths();

  std::vector<ConvexPiece> local;
  local.reserve(dt.piece_count());
  for (Index n = 0; n < N; ++n)
    for (Index i = 0; i < k; ++i) local.push_back(to_local(dt.piece(n, i), ls.lower(i), w[i]));

  // Diagonal preconditioners from row / column sums of |K| after rescaling
  // the columns of s by d_i and the gradient rows by c.
  const double c = std::pow(cfg.effective_tv_scale(), 2.0 - alpha);
  Vec tau_u(N);
  for (Index y = 0; y < grid.height; ++y)
    for (Index x = 0; x < grid.width; ++x) tau_u[grid.pixel(x, y)] = 1.0 / (1.0 + c * stencil_count(grid, x, y));
  Vec d(k);
  for (Index i = 0; i < k; ++i) d[i] = cfg.multiplier_scale > 0.0 ? cfg.multiplier_scale / w[i] : 1.0;
  Vec tau_s(k);
  Vec sigma_v(k);
  double sigma_q_inv = 0.0;
  for (Index i = 0; i < k; ++i) {
    tau_s[i] = std::pow(d[i], alpha) / (1.0 + static_cast<double>(i + 1) * std::pow(w[i], 2.0 - alpha));
    double row = 1.0;
    for (Index j = i + 1; j < k; ++j) row += std::pow(d[j] * w[j], alpha);
    sigma_v[i] = std::min(1.0 / row, std::pow(d[i], -alpha));  // shared with z_i so the pair projection stays Euclidean
    sigma_q_inv += std::pow(d[i] * w[i], alpha);
  }
  const double sigma_q = 1.0 / sigma_q_inv;
  const double sigma_p = c / 2.0;
  double theta = 1.0;  // adaptive rescaling: tau * theta, sigma / theta

  SolveResult res;
  res.u = LiftedField(grid, k);
  DualState& st = res.state;
  st.v = Mat::Zero(k, N);
  st.q = Vec::Zero(N);
  st.px = Mat::Zero(k, N);
  st.py = Mat::Zero(k, N);
  st.z = Mat::Zero(k, N);
  st.s = Mat::Zero(k, N);
  Mat& u = res.u.values;

  const CostFunction rho = energy_cost ? energy_cost : CostFunction([&dt](Index n, double g) { return dt.eval(n, g); });

  Mat KTu(k, N), KTs(k, N), Kv(k, N), Kpx(k, N), Kpy(k, N), Kz(k, N);
  Vec Kq(N);
  Mat u_bar(k, N), s_bar(k, N);
  Mat u_old, s_old, v_old, px_old, py_old, z_old;
  Vec q_old;

  Stopwatch clock(!cfg.deterministic);
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const bool check = it % cfg.check_every == 0 || it == cfg.max_iters;
    if (check) {
      u_old = u, s_old = st.s, v_old = st.v, q_old = st.q, px_old = st.px, py_old = st.py, z_old = st.z;
    }

    // Primal descent (G = 0), then extrapolation.
    K.apply_adjoint(st.v, st.q, st.px, st.py, st.z, KTu, KTs);
    u_bar = u;
    s_bar = st.s;
    for (Index n = 0; n < N; ++n) {
      u.col(n) -= (theta * tau_u[n]) * KTu.col(n);
      st.s.col(n) -= theta * tau_s.cwiseProduct(KTs.col(n));
    }
    u_bar = 2.0 * u - u_bar;
    s_bar = 2.0 * st.s - s_bar;

    // Dual ascent followed by the projections.
    K.apply(u_bar, s_bar, Kv, Kq, Kpx, Kpy, Kz);
    const double sp = sigma_p / theta;
    st.px += sp * Kpx;
    st.py += sp * Kpy;
    st.q += (sigma_q / theta) * (Kq - Vec::Ones(N));
#pragma omp parallel for schedule(static)
    for (Index n = 0; n < N; ++n) {
      Eigen::Matrix<double, Eigen::Dynamic, 2> P(k, 2);
      for (Index i = 0; i < k; ++i) {
        const double sv = sigma_v[i] / theta;
        const Eigen::Vector2d point(st.v(i, n) + sv * Kv(i, n), st.z(i, n) + sv * Kz(i, n));
        const Eigen::Vector2d proj =
            proj_scaled_conjugate_epigraph(local[static_cast<std::size_t>(n * k + i)], point, w[i]);
        st.v(i, n) = proj[0];
        st.z(i, n) = proj[1];
      }
      P.col(0) = st.px.col(n);
      P.col(1) = st.py.col(n);
      proj_K_inplace(P, ls, cfg.regularizer, cfg.lambda);
      st.px.col(n) = P.col(0);
      st.py.col(n) = P.col(1);
    }

    if (!check) continue;

    // Residuals: P = dx / tau - K^T dy, D = dy / sigma - K dx.
    Mat du = u_old - u, ds = s_old - st.s;
    Mat dv = v_old - st.v, dpx = px_old - st.px, dpy = py_old - st.py, dz = z_old - st.z;
    Vec dq = q_old - st.q;
    K.apply_adjoint(dv, dq, dpx, dpy, dz, KTu, KTs);
    for (Index n = 0; n < N; ++n) {
      KTu.col(n) = du.col(n) / (theta * tau_u[n]) - KTu.col(n);
      KTs.col(n) = ds.col(n).cwiseQuotient(theta * tau_s) - KTs.col(n);
    }
    const double primal = rms(sum_squares(KTu) + sum_squares(KTs), 2 * k * N);
    K.apply(du, ds, Kv, Kq, Kpx, Kpy, Kz);
    for (Index n = 0; n < N; ++n) {
      Kv.col(n) = dv.col(n).cwiseQuotient(sigma_v / theta) - Kv.col(n);
      Kz.col(n) = dz.col(n).cwiseQuotient(sigma_v / theta) - Kz.col(n);
    }
    Kq = dq / (sigma_q / theta) - Kq;
    Kpx = dpx / (sigma_p / theta) - Kpx;
    Kpy = dpy / (sigma_p / theta) - Kpy;
    const double dual = rms(sum_squares(Kv) + Kq.squaredNorm() + sum_squares(Kpx) + sum_squares(Kpy) + sum_squares(Kz),
                            4 * k * N + N);

    EnergyRecord rec;
    rec.iteration = it;
    rec.primal_residual = primal;
    rec.dual_residual = dual;
    rec.seconds = clock.seconds();
    if (!u.allFinite() || !std::isfinite(primal) || !std::isfinite(dual)) {
      rec.energy = std::numeric_limits<double>::quiet_NaN();
      res.log.records.push_back(rec);
      throw DivergenceError(it, res.log);
    }
    rec.energy = energy_unlifted(rho, ls, res.u, cfg.lambda, cfg.regularizer);
    res.log.records.push_back(rec);
    res.iterations = it;

    if (std::max(primal, dual) < cfg.stop_tol) {
      res.converged = true;
      break;
    }
    if (cfg.adaptive) {
      if (primal > 2.0 * dual) theta *= 1.05;
      else if (dual > 2.0 * primal) theta /= 1.05;
    }
  }
  return res;
}

SolveResult solve_baseline(const BaselineCosts& bc, const SolverConfig& cfg, const CostFunction& energy_cost) {
  cfg.validate();
  const GridShape grid = bc.grid;
  const LabelSpace& ls = bc.ls;
  const Index N = grid.size();
  const Index k = ls.num_intervals();
  const Mat r = baseline_r(bc);
  const double c = std::pow(cfg.effective_tv_scale(), 2.0 - cfg.precond_alpha);

  Vec tau(N);
  for (Index y = 0; y < grid.height; ++y)
    for (Index x = 0; x < grid.width; ++x) {
      const int cnt = stencil_count(grid, x, y);
      tau[grid.pixel(x, y)] = cnt > 0 ? 1.0 / (c * cnt) : 1.0;
    }
  const double sigma_p = c / 2.0;
  double theta = 1.0;

  SolveResult res;
  res.u = LiftedField(grid, k);
  DualState& st = res.state;
  st.px = Mat::Zero(k, N);
  st.py = Mat::Zero(k, N);
  Mat& u = res.u.values;

  const CostFunction rho = energy_cost ? energy_cost : CostFunction([&bc](Index n, double g) { return bc.eval(n, g); });

  Mat d(k, N), u_bar(k, N), gx(k, N), gy(k, N);
  Mat u_old, px_old, py_old;
  Eigen::Matrix<double, Eigen::Dynamic, 2> P(k, 2);
  Stopwatch clock(!cfg.deterministic);
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const bool check = it % cfg.check_every == 0 || it == cfg.max_iters;
    if (check) u_old = u, px_old = st.px, py_old = st.py;

    div(grid, st.px, st.py, d);
    u_bar = u;
    for (Index n = 0; n < N; ++n) {
      const Vec step = u.col(n) - (theta * tau[n]) * (r.col(n) - d.col(n));
      u.col(n) = proj_monotone_box(step);
    }
    u_bar = 2.0 * u - u_bar;

    grad(grid, u_bar, gx, gy);
    st.px += (sigma_p / theta) * gx;
    st.py += (sigma_p / theta) * gy;
    for (Index n = 0; n < N; ++n) {
      P.col(0) = st.px.col(n);
      P.col(1) = st.py.col(n);
      proj_K_inplace(P, ls, cfg.regularizer, cfg.lambda);
      st.px.col(n) = P.col(0);
      st.py.col(n) = P.col(1);
    }

    if (!check) continue;

    Mat du = u_old - u, dpx = px_old - st.px, dpy = py_old - st.py;
    div(grid, dpx, dpy, d);  // K^T dp = -div dp
    for (Index n = 0; n < N; ++n) d.col(n) = du.col(n) / (theta * tau[n]) + d.col(n);
    const double primal = rms(sum_squares(d), k * N);
    grad(grid, du, gx, gy);
    gx = dpx / (sigma_p / theta) - gx;
    gy = dpy / (sigma_p / theta) - gy;
    const double dual = rms(sum_squares(gx) + sum_squares(gy), 2 * k * N);

    EnergyRecord rec;
    rec.iteration = it;
    rec.primal_residual = primal;
    rec.dual_residual = dual;
    rec.seconds = clock.seconds();
    if (!u.allFinite() || !std::isfinite(primal) || !std::isfinite(dual)) {
      rec.energy = std::numeric_limits<double>::quiet_NaN();
      res.log.records.push_back(rec);
      throw DivergenceError(it, res.log);
    }
    rec.energy = energy_unlifted(rho, ls, res.u, cfg.lambda, cfg.regularizer);
    res.log.records.push_back(rec);
    res.iterations = it;
    if (std::max(primal, dual) < cfg.stop_tol) {
      res.converged = true;
      break;
    }
    if (cfg.adaptive) {
      if (primal > 2.0 * dual) theta *= 1.05;
      else if (dual > 2.0 * primal) theta /= 1.05;
    }
  }
  return res;
}

double total_variation(const ScalarField& u, RegularizerKind kind) {
  const GridShape& g = u.grid;
  double tv = 0.0;
  for (Index y = 0; y < g.height; ++y)
    for (Index x = 0; x < g.width; ++x) {
      const double dx = x + 1 < g.width ? u(x + 1, y) - u(x, y) : 0.0;
      const double dy = y + 1 < g.height ? u(x, y + 1) - u(x, y) : 0.0;
      tv += kind == RegularizerKind::Isotropic ? std::hypot(dx, dy) : std::abs(dx) + std::abs(dy);
    }
  return tv;
}

double energy_scalar(const CostFunction& rho, const ScalarField& u, double lambda, RegularizerKind kind) {
  double data = 0.0;
  for (Index n = 0; n < u.grid.size(); ++n) data += rho(n, u.values[n]);
  return data + lambda * total_variation(u, kind);
}

double energy_unlifted(const CostFunction& rho, const LabelSpace& ls, const LiftedField& u, double lambda,
                       RegularizerKind kind) {
  return energy_scalar(rho, unlift_field(ls, u), lambda, kind);
}

double lifted_total_variation(const LabelSpace& ls, const LiftedField& u, RegularizerKind kind) {
  const Index k = u.num_intervals();
  Mat gx(k, u.grid.size()), gy(k, u.grid.size());
  grad(u.grid, u.values, gx, gy);
  double tv = 0.0;
  for (Index n = 0; n < u.grid.size(); ++n)
    for (Index i = 0; i < k; ++i) {
      const double a = gx(i, n), b = gy(i, n);
      tv += ls.width(i) * (kind == RegularizerKind::Isotropic ? std::hypot(a, b) : std::abs(a) + std::abs(b));
    }
  return tv;
}

double relaxed_linear_energy(const BaselineCosts& bc, const LiftedField& u, double lambda, RegularizerKind kind) {
  LiftedField feasible(u.grid, u.num_intervals());
  double data = 0.0;
  for (Index n = 0; n < u.grid.size(); ++n) {
    const Vec un = proj_monotone_box(Vec(u.pixel(n)));
    feasible.pixel(n) = un;
    data += baseline_dataterm(bc, n, un);
  }
  return data + lambda * lifted_total_variation(bc.ls, feasible, kind);
}

long long variable_count(const GridShape& grid, Index num_labels, Method method) {
  if (num_labels < 2) throw ArgumentError("variable_count: need at least 2 labels");
  const long long N = grid.size();
  const long long k = num_labels - 1;
  return method == Method::Baseline ? 4 * N * k : 6 * N * k + N;
}

}  // namespace sublift
