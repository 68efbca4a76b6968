#include "sublift/types.hpp"

#include <cmath>
#include <string>

namespace sublift {

LabelSpace::LabelSpace(std::vector<double> gammas) : gammas_(std::move(gammas)) {
  if (gammas_.size() < 2) throw ArgumentError("label space needs at least 2 labels");
  for (std::size_t i = 0; i < gammas_.size(); ++i) {
    if (!std::isfinite(gammas_[i])) throw ArgumentError("labels must be finite");
    if (i > 0 && !(gammas_[i - 1] < gammas_[i]))
      throw ArgumentError("labels must be strictly ascending (index " + std::to_string(i) + ")");
  }
}

LabelSpace LabelSpace::uniform(double lo, double hi, Index num_labels) {
  if (num_labels < 2) throw ArgumentError("label space needs at least 2 labels");
  if (!(lo < hi)) throw ArgumentError("label range must satisfy lo < hi");
  std::vector<double> g(static_cast<std::size_t>(num_labels));
  for (Index i = 0; i < num_labels; ++i)
    g[static_cast<std::size_t>(i)] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(num_labels - 1);
  g.back() = hi;
  return LabelSpace(std::move(g));
}

ScalarField::ScalarField(GridShape g, Eigen::VectorXd v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw ArgumentError("scalar field size does not match grid");
}

}  // namespace sublift
