#include "crowdcount/density.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>

namespace crowdcount {

void KernelParams::validate() const {
  if (!(sigma > 0.0)) {
    throw std::invalid_argument(
        fmt::format("kernel: sigma must be positive, got {}", sigma));
  }
  if (truncation_radius && !(*truncation_radius > 0.0)) {
    throw std::invalid_argument(fmt::format(
        "kernel: truncation radius must be positive, got {}", *truncation_radius));
  }
}

void DensityGrid::validate() const {
  spec.validate();
  if (values.size() != spec.size()) {
    throw std::invalid_argument(
        fmt::format("density: grid holds {} values, expected {}x{}={}",
                    values.size(), spec.cols, spec.rows, spec.size()));
  }
  for (std::size_t m = 0; m < values.size(); ++m) {
    if (!std::isfinite(values[m]) || values[m] < 0.0) {
      throw std::invalid_argument(fmt::format(
          "density: cell {} holds invalid value {}", m, values[m]));
    }
  }
}

double gaussian_at(Point x, Point z, const KernelParams& params) {
  params.validate();
  const double dx = x.x - z.x;
  const double dy = x.y - z.y;
  const double r2 = dx * dx + dy * dy;
  if (params.truncation_radius) {
    const double radius = *params.truncation_radius * params.sigma;
    if (r2 > radius * radius) return 0.0;
  }
  const double s2 = params.sigma * params.sigma;
  const double e = std::exp(-r2 / (2.0 * s2));
  return params.normalized ? e / (2.0 * std::numbers::pi * s2) : e;
}

DensityGrid generate_gt_density(const FrameAnnotation& frame,
                                const GridSpec& spec,
                                const KernelParams& params) {
  frame.validate();
  params.validate();
  if (!spec.covers(frame.width, frame.height)) {
    throw std::invalid_argument(fmt::format(
        "density: grid {}x{} stride {} does not match frame '{}' ({}x{})",
        spec.cols, spec.rows, spec.stride, frame.frame_id, frame.width,
        frame.height));
  }
  DensityGrid grid;
  grid.spec = spec;
  grid.values.assign(spec.size(), 0.0);
  const double cell_area = spec.stride * spec.stride;
  for (int row = 0; row < spec.rows; ++row) {
    for (int col = 0; col < spec.cols; ++col) {
      const Point center = spec.cell_center(col, row);
      double density = 0.0;
      for (const Point& z : frame.points) {  // fixed annotation order
        density += gaussian_at(center, z, params);
      }
      grid.values[spec.index(col, row)] = density * cell_area;
    }
  }
  return grid;
}

double total_count(const DensityGrid& grid) {
  grid.validate();
  double total = 0.0;
  for (double v : grid.values) total += v;  // ascending cell order
  return total;
}

ImageRGB render_overlay(const ImageRGB& image, const DensityGrid& grid) {
  grid.validate();
  if (!grid.spec.covers(image.width, image.height)) {
    throw std::invalid_argument(fmt::format(
        "render: {}x{} image does not match grid {}x{} at stride {}",
        image.width, image.height, grid.spec.cols, grid.spec.rows,
        grid.spec.stride));
  }
  const double peak = std::max(
      *std::max_element(grid.values.begin(), grid.values.end()), 1e-12);
  ImageRGB out = image;
  for (int py = 0; py < image.height; ++py) {
    const int row = std::min(grid.spec.rows - 1,
                             static_cast<int>(py / grid.spec.stride));
    for (int px = 0; px < image.width; ++px) {
      const int col = std::min(grid.spec.cols - 1,
                               static_cast<int>(px / grid.spec.stride));
      const double v = grid.values[grid.spec.index(col, row)];
      out.at(px, py)[0] = static_cast<std::uint8_t>(
          std::lround(255.0 * std::min(1.0, v / peak)));
    }
  }
  return out;
}

void write_raster(const std::string& path, const DensityGrid& grid) {
  grid.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error(fmt::format("raster: cannot write '{}'", path));
  }
  out << fmt::format("CDM1 {} {} {}\n", grid.spec.cols, grid.spec.rows,
                     grid.spec.stride);
  for (double v : grid.values) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(bits & 0xff),
        static_cast<unsigned char>((bits >> 8) & 0xff),
        static_cast<unsigned char>((bits >> 16) & 0xff),
        static_cast<unsigned char>((bits >> 24) & 0xff),
    };
    out.write(reinterpret_cast<const char*>(bytes), 4);
  }
  if (!out) {
    throw std::runtime_error(fmt::format("raster: write to '{}' failed", path));
  }
}

DensityGrid read_raster(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error(fmt::format("raster: cannot open '{}'", path));
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw std::runtime_error(fmt::format("raster: '{}' is empty", path));
  }
  std::istringstream hs(header);
  std::string magic;
  DensityGrid grid;
  if (!(hs >> magic >> grid.spec.cols >> grid.spec.rows >> grid.spec.stride) ||
      magic != "CDM1") {
    throw std::runtime_error(fmt::format(
        "raster: '{}' has a malformed header (expected 'CDM1 <cols> <rows> "
        "<stride>'), got '{}'",
        path, header));
  }
  try {
    grid.spec.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(fmt::format("raster: '{}': {}", path, e.what()));
  }
  grid.values.resize(grid.spec.size());
  for (std::size_t m = 0; m < grid.values.size(); ++m) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
      throw std::runtime_error(fmt::format(
          "raster: '{}' is truncated at cell {} of {}", path, m,
          grid.values.size()));
    }
    const std::uint32_t bits =
        static_cast<std::uint32_t>(bytes[0]) |
        (static_cast<std::uint32_t>(bytes[1]) << 8) |
        (static_cast<std::uint32_t>(bytes[2]) << 16) |
        (static_cast<std::uint32_t>(bytes[3]) << 24);
    grid.values[m] = std::bit_cast<float>(bits);
  }
  try {
    grid.validate();
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(fmt::format("raster: '{}': {}", path, e.what()));
  }
  return grid;
}

}  // namespace crowdcount
