#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crowdcount/annotations.hpp"
#include "crowdcount/image.hpp"

namespace crowdcount {

// Isotropic 2D Gaussian kernel placed on every head point.
struct KernelParams {
  double sigma = 8.0;  // pixels, > 0
  // Unit-mass kernel (1/(2*pi*sigma^2) factor) vs bare exponential.
  bool normalized = true;
  // Kernel is zero beyond truncation_radius * sigma; nullopt = exact sums.
  std::optional<double> truncation_radius;

  void validate() const;
};

// Raster of density mass per cell: value = density * cell area (stride^2),
// so the grid sum approximates the integral of the underlying field and
// total_count is stride-invariant up to discretization error.
struct DensityGrid {
  GridSpec spec;
  std::vector<double> values;  // row-major, rows*cols entries, finite, >= 0

  void validate() const;
};

// N(x; z, sigma^2 I) = exp(-|x-z|^2 / (2 sigma^2)) / (2 pi sigma^2) when
// normalized; 0 past the truncation radius when one is set.
double gaussian_at(Point x, Point z, const KernelParams& params);

// Ground-truth density: cell value = sum over heads of the kernel at the
// cell center, times the cell area.
DensityGrid generate_gt_density(const FrameAnnotation& frame,
                                const GridSpec& spec,
                                const KernelParams& params);

double total_count(const DensityGrid& grid);

// Replaces the red channel with the density map, normalized by the grid's
// own peak (green/blue copied unchanged). Image dimensions must be the ones
// the grid was derived from.
ImageRGB render_overlay(const ImageRGB& image, const DensityGrid& grid);

// CDM1 raster file: ASCII header "CDM1 <cols> <rows> <stride>\n" followed by
// cols*rows little-endian 32-bit IEEE floats, row-major.
void write_raster(const std::string& path, const DensityGrid& grid);
DensityGrid read_raster(const std::string& path);

}  // namespace crowdcount
