#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace crowdcount {

// Interleaved 8-bit RGB raster, row-major.
struct ImageRGB {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // 3 * width * height bytes

  static ImageRGB filled(int width, int height, std::uint8_t r,
                         std::uint8_t g, std::uint8_t b);

  std::uint8_t* at(int x, int y) {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
  const std::uint8_t* at(int x, int y) const {
    return pixels.data() + 3 * (static_cast<std::size_t>(y) * width + x);
  }
};

ImageRGB read_png(const std::string& path);
void write_png(const std::string& path, const ImageRGB& image);

}  // namespace crowdcount
