#pragma once

#include <filesystem>
#include <vector>

#include "sublift/dataterm.hpp"
#include "sublift/types.hpp"

namespace sublift {

// Matching costs sampled at M equispaced label values on [gamma_min,
// gamma_max]; data[pixel * M + j] is the cost of sample j at pixel.
struct CostVolume {
  GridShape grid;
  Index samples = 0;
  double gamma_min = 0.0;
  double gamma_max = 1.0;
  std::vector<float> data;

  CostVolume() = default;
  CostVolume(GridShape g, Index m, double lo, double hi);

  double sample_gamma(Index j) const;
  float& at(Index pixel, Index j) { return data[static_cast<std::size_t>(pixel * samples + j)]; }
  float at(Index pixel, Index j) const { return data[static_cast<std::size_t>(pixel * samples + j)]; }

  // Linear interpolation between samples; gamma is clamped to the sampled range.
  double interpolate(Index pixel, double gamma) const;

  // Index of the minimal sample at a pixel (first one on ties).
  Index argmin(Index pixel) const;

  friend bool operator==(const CostVolume&, const CostVolume&) = default;
};

// Binary CVOL file: "CVOL", u32 width, u32 height, u32 samples, f64 gamma_min,
// f64 gamma_max, then width*height*samples little-endian f32 values.
void write_cvol(const std::filesystem::path& path, const CostVolume& cv);
CostVolume read_cvol(const std::filesystem::path& path);

// CSV alternative: one row per pixel, comma-separated costs.
void write_cost_csv(const std::filesystem::path& path, const CostVolume& cv);
CostVolume read_cost_csv(const std::filesystem::path& path, GridShape grid, double gamma_min, double gamma_max);

// Per interval: every volume sample strictly inside plus the interpolated
// interval endpoints, convexified. This is the convex envelope of the
// linearly interpolated cost on that interval.
DatatermVolume volume_from_costs(const CostVolume& cv, const LabelSpace& ls);

// Interpolated costs at the labels.
BaselineCosts baseline_from_costs(const CostVolume& cv, const LabelSpace& ls);

}  // namespace sublift
