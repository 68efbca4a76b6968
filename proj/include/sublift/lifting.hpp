#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "sublift/projections.hpp"
#include "sublift/types.hpp"

namespace sublift {

// Position of a value inside the label grid: value = gamma_i + alpha * w_i.
struct SublabelPosition {
  Index interval = 0;  // 0-based
  double alpha = 0.0;
};

// Interior labels are assigned to the lower interval with alpha = 1.
inline SublabelPosition locate(const LabelSpace& ls, double value) {
  if (!(value >= ls.min() && value <= ls.max())) {
    std::ostringstream os;
    os << "value " << value << " outside label range [" << ls.min() << ", " << ls.max() << "]";
    throw RangeError(os.str());
  }
  const auto& g = ls.labels();
  if (value == g.front()) return {0, 0.0};
  // First label >= value; value lies in (g[it-1], g[it]].
  auto it = std::lower_bound(g.begin(), g.end(), value);
  const Index upper = static_cast<Index>(it - g.begin());
  const Index i = upper - 1;
  const double alpha = (value - ls.lower(i)) / ls.width(i);
  return {i, std::clamp(alpha, 0.0, 1.0)};
}

// The lifted vector 1_i^alpha = alpha * 1_i + (1 - alpha) * 1_{i-1}.
template <typename Scalar = double>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> lift(const LabelSpace& ls, double value) {
  const auto pos = locate(ls, value);
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> u = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(ls.num_intervals());
  u.head(pos.interval).setOnes();
  u[pos.interval] = static_cast<Scalar>(pos.alpha);
  return u;
}

// Layer-cake reconstruction gamma_1 + sum_i u_i (gamma_{i+1} - gamma_i).
// No feasibility is assumed.
template <typename Derived>
typename Derived::Scalar unlift(const LabelSpace& ls, const Eigen::MatrixBase<Derived>& u) {
  using Scalar = typename Derived::Scalar;
  if (u.size() != ls.num_intervals()) throw ArgumentError("lifted vector length must equal k");
  Scalar acc = static_cast<Scalar>(ls.min());
  for (Index i = 0; i < u.size(); ++i) acc += u[i] * static_cast<Scalar>(ls.width(i));
  return acc;
}

// Per-pixel monotone-box projection followed by unlift.
inline ScalarField unlift_field(const LabelSpace& ls, const LiftedField& lf) {
  if (lf.num_intervals() != ls.num_intervals()) throw ArgumentError("lifted field has wrong k");
  ScalarField out(lf.grid);
  for (Index n = 0; n < lf.grid.size(); ++n) {
    const Eigen::VectorXd u = proj_monotone_box(Eigen::VectorXd(lf.pixel(n)));
    out.values[n] = std::clamp(unlift(ls, u), ls.min(), ls.max());
  }
  return out;
}

inline LiftedField lift_field(const LabelSpace& ls, const ScalarField& f) {
  LiftedField out(f.grid, ls.num_intervals());
  for (Index n = 0; n < f.grid.size(); ++n) out.pixel(n) = lift(ls, f.values[n]);
  return out;
}

}  // namespace sublift
