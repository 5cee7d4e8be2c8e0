#include "crowdcount/image.hpp"

#include <cstdio>
#include <memory>
#include <stdexcept>

#include <fmt/core.h>
#include <png.h>

namespace crowdcount {

ImageRGB ImageRGB::filled(int width, int height, std::uint8_t r,
                          std::uint8_t g, std::uint8_t b) {
  if (width < 1 || height < 1) {
    throw std::invalid_argument(
        fmt::format("image: non-positive dimensions {}x{}", width, height));
  }
  ImageRGB img;
  img.width = width;
  img.height = height;
  img.pixels.resize(3 * static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i + 2 < img.pixels.size(); i += 3) {
    img.pixels[i] = r;
    img.pixels[i + 1] = g;
    img.pixels[i + 2] = b;
  }
  return img;
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

ImageRGB read_png(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) {
    throw std::invalid_argument(fmt::format("image: cannot open '{}'", path));
  }
  png_byte header[8];
  if (std::fread(header, 1, 8, fp.get()) != 8 ||
      png_sig_cmp(header, 0, 8) != 0) {
    throw std::invalid_argument(
        fmt::format("image: '{}' is not a PNG file", path));
  }
  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::runtime_error("image: libpng initialization failed");
  }
  ImageRGB img;
  std::vector<png_bytep> row_ptrs;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw std::invalid_argument(
        fmt::format("image: failed to decode '{}'", path));
  }
  png_init_io(png, fp.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);

  // Normalize everything to 8-bit RGB.
  png_set_expand(png);
  png_set_strip_16(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  img.width = static_cast<int>(png_get_image_width(png, info));
  img.height = static_cast<int>(png_get_image_height(png, info));
  img.pixels.resize(3 * static_cast<std::size_t>(img.width) * img.height);
  row_ptrs.resize(img.height);
  for (int y = 0; y < img.height; ++y) {
    row_ptrs[y] = img.pixels.data() + 3 * static_cast<std::size_t>(y) * img.width;
  }
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

void write_png(const std::string& path, const ImageRGB& image) {
  if (image.width < 1 || image.height < 1 ||
      image.pixels.size() !=
          3 * static_cast<std::size_t>(image.width) * image.height) {
    throw std::invalid_argument("image: malformed RGB raster");
  }
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) {
    throw std::runtime_error(fmt::format("image: cannot write '{}'", path));
  }
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error("image: libpng initialization failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw std::runtime_error(fmt::format("image: failed to encode '{}'", path));
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, const_cast<png_bytep>(image.at(0, y)));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace crowdcount
