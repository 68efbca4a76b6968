#include "sublift/cost_volume.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

namespace sublift {

namespace {

template <typename T>
void put_le(std::ostream& os, T value) {
  std::array<unsigned char, sizeof(T)> bytes;
  std::memcpy(bytes.data(), &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  os.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get_le(std::istream& is) {
  std::array<unsigned char, sizeof(T)> bytes;
  if (!is.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) throw IoError("CVOL: unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  T value;
  std::memcpy(&value, bytes.data(), sizeof(T));
  return value;
}

}  // namespace

CostVolume::CostVolume(GridShape g, Index m, double lo, double hi)
    : grid(g), samples(m), gamma_min(lo), gamma_max(hi), data(static_cast<std::size_t>(g.size() * m), 0.0f) {
  if (m < 2) throw ArgumentError("cost volume needs at least 2 samples");
  if (!(lo < hi)) throw ArgumentError("cost volume range must satisfy gamma_min < gamma_max");
}

double CostVolume::sample_gamma(Index j) const {
  return gamma_min + (gamma_max - gamma_min) * static_cast<double>(j) / static_cast<double>(samples - 1);
}

double CostVolume::interpolate(Index pixel, double gamma) const {
  const double pos = std::clamp((gamma - gamma_min) / (gamma_max - gamma_min), 0.0, 1.0) *
                     static_cast<double>(samples - 1);
  const Index j = std::min<Index>(static_cast<Index>(std::floor(pos)), samples - 2);
  const double t = pos - static_cast<double>(j);
  return (1.0 - t) * at(pixel, j) + t * at(pixel, j + 1);
}

Index CostVolume::argmin(Index pixel) const {
  Index best = 0;
  for (Index j = 1; j < samples; ++j)
    if (at(pixel, j) < at(pixel, best)) best = j;
  return best;
}

void write_cvol(const std::filesystem::path& path, const CostVolume& cv) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write("CVOL", 4);
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(cv.grid.width));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(cv.grid.height));
  put_le<std::uint32_t>(os, static_cast<std::uint32_t>(cv.samples));
  put_le<double>(os, cv.gamma_min);
  put_le<double>(os, cv.gamma_max);
  for (float v : cv.data) put_le<float>(os, v);
  if (!os) throw IoError("write failed: " + path.string());
}

CostVolume read_cvol(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "CVOL") throw IoError(path.string() + ": not a CVOL file");
  const auto w = get_le<std::uint32_t>(is);
  const auto h = get_le<std::uint32_t>(is);
  const auto m = get_le<std::uint32_t>(is);
  const auto lo = get_le<double>(is);
  const auto hi = get_le<double>(is);
  if (w == 0 || h == 0 || m < 2 || !(lo < hi)) throw IoError(path.string() + ": invalid CVOL header");
  CostVolume cv(GridShape(w, h), m, lo, hi);
  for (float& v : cv.data) v = get_le<float>(is);
  return cv;
}

void write_cost_csv(const std::filesystem::path& path, const CostVolume& cv) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.precision(9);
  for (Index n = 0; n < cv.grid.size(); ++n) {
    for (Index j = 0; j < cv.samples; ++j) {
      if (j) os << ',';
      os << cv.at(n, j);
    }
    os << '\n';
  }
}

CostVolume read_cost_csv(const std::filesystem::path& path, GridShape grid, double gamma_min, double gamma_max) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::vector<float>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<float> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stof(cell));
      } catch (const std::exception&) {
        throw IoError(path.string() + ": malformed cost '" + cell + "'");
      }
    }
    if (!rows.empty() && row.size() != rows.front().size()) throw IoError(path.string() + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (static_cast<Index>(rows.size()) != grid.size()) throw IoError(path.string() + ": row count does not match grid");
  CostVolume cv(grid, static_cast<Index>(rows.front().size()), gamma_min, gamma_max);
  for (Index n = 0; n < grid.size(); ++n)
    for (Index j = 0; j < cv.samples; ++j) cv.at(n, j) = rows[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
  return cv;
}

DatatermVolume volume_from_costs(const CostVolume& cv, const LabelSpace& ls) {
  const Index k = ls.num_intervals();
  std::vector<ConvexPiece> pieces;
  pieces.reserve(static_cast<std::size_t>(cv.grid.size() * k));
  std::vector<double> gs;
  std::vector<double> cs;
  for (Index n = 0; n < cv.grid.size(); ++n) {
    for (Index i = 0; i < k; ++i) {
      const double lo = ls.lower(i);
      const double hi = ls.upper(i);
      gs.clear();
      gs.push_back(lo);
      for (Index j = 0; j < cv.samples; ++j) {
        const double g = cv.sample_gamma(j);
        if (g > lo && g < hi) gs.push_back(g);
      }
      gs.push_back(hi);
      cs.resize(gs.size());
      for (std::size_t m = 0; m < gs.size(); ++m) {
        cs[m] = cv.interpolate(n, gs[m]);
        if (!std::isfinite(cs[m])) throw InputError("non-finite value in cost volume");
      }
      pieces.emplace_back(convexify_interval(gs, cs));
    }
  }
  return DatatermVolume(cv.grid, ls, std::move(pieces));
}

BaselineCosts baseline_from_costs(const CostVolume& cv, const LabelSpace& ls) {
  Eigen::MatrixXd c(ls.num_labels(), cv.grid.size());
  for (Index n = 0; n < cv.grid.size(); ++n)
    for (Index l = 0; l < ls.num_labels(); ++l) c(l, n) = cv.interpolate(n, ls.label(l));
  return BaselineCosts(cv.grid, ls, std::move(c));
}

}  // namespace sublift
