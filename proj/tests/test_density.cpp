#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "crowdcount/density.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace crowdcount;

namespace {

DensityGrid grid_of(double stride, int cols, int rows, double fill = 0.0) {
  DensityGrid g;
  g.spec = {stride, cols, rows};
  g.values.assign(g.spec.size(), fill);
  return g;
}

}  // namespace

TEST_CASE("kernel peak and one-sigma values, sigma 8") {
  const KernelParams params;  // sigma 8, normalized
  const double peak = gaussian_at({5.0, 7.0}, {5.0, 7.0}, params);
  CHECK(peak == doctest::Approx(0.0024867959858108648).epsilon(1e-12));
  const double one_sigma = gaussian_at({13.0, 7.0}, {5.0, 7.0}, params);
  CHECK(one_sigma ==
        doctest::Approx(0.0015083180098445924).epsilon(1e-12));
  CHECK(one_sigma == doctest::Approx(peak * std::exp(-0.5)).epsilon(1e-12));
}

TEST_CASE("truncation zeroes the kernel past the radius") {
  KernelParams params;
  params.truncation_radius = 4.0;  // in sigmas
  CHECK(gaussian_at({40.0, 0.0}, {0.0, 0.0}, params) == 0.0);  // 5 sigma
  CHECK(gaussian_at({31.9, 0.0}, {0.0, 0.0}, params) > 0.0);   // within 4 sigma
  params.truncation_radius = 0.0;
  CHECK_THROWS_AS(gaussian_at({0, 0}, {0, 0}, params), std::invalid_argument);
}

TEST_CASE("unnormalized kernel is the bare exponential") {
  KernelParams params;
  params.normalized = false;
  CHECK(gaussian_at({0, 0}, {0, 0}, params) == 1.0);
  CHECK(gaussian_at({8, 0}, {0, 0}, params) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
}

TEST_CASE("single centered point conserves unit mass") {
  FrameAnnotation frame{"center", 256, 256, {{128.0, 128.0}}};
  const GridSpec spec = GridSpec::for_frame(frame, 1.0);
  const DensityGrid grid = generate_gt_density(frame, spec, KernelParams{});
  CHECK(total_count(grid) == doctest::Approx(1.0).epsilon(1e-3));
  // Tight check against the analytic window mass.
  const double expected = oracle::frame_mass(frame, spec, 8.0);
  CHECK(total_count(grid) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("empty frame produces the zero grid") {
  FrameAnnotation frame{"empty", 64, 48, {}};
  const GridSpec spec = GridSpec::for_frame(frame, 1.0);
  const DensityGrid grid = generate_gt_density(frame, spec, KernelParams{});
  CHECK(total_count(grid) == 0.0);
  CHECK(std::all_of(grid.values.begin(), grid.values.end(),
                    [](double v) { return v == 0.0; }));
}

TEST_CASE("nine-point lattice carries nine persons of mass") {
  const FrameAnnotation frame = synth_lattice(3, 3, 64.0, 32.0);
  const GridSpec spec = GridSpec::for_frame(frame, 1.0);
  const DensityGrid grid = generate_gt_density(frame, spec, KernelParams{});
  CHECK(total_count(grid) == doctest::Approx(9.0).epsilon(1e-2 / 9.0));
  const double expected = oracle::frame_mass(frame, spec, 8.0);
  CHECK(total_count(grid) == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("total_count is stride-invariant up to discretization") {
  FrameAnnotation frame{"s", 200, 160, {{77.3, 81.9}, {120.0, 60.5}}};
  const KernelParams params;
  const double t1 = total_count(
      generate_gt_density(frame, GridSpec::for_frame(frame, 1.0), params));
  const double t8 = total_count(
      generate_gt_density(frame, GridSpec::for_frame(frame, 8.0), params));
  CHECK(t1 == doctest::Approx(t8).epsilon(2e-2));
}

TEST_CASE("translation by whole cells permutes values exactly") {
  const double stride = 4.0;
  FrameAnnotation frame{"t", 160, 160, {{60.25, 58.5}, {79.0, 90.75}}};
  const GridSpec spec = GridSpec::for_frame(frame, stride);
  const DensityGrid base = generate_gt_density(frame, spec, KernelParams{});

  const int k = 3, l = 2;
  FrameAnnotation shifted = frame;
  for (Point& p : shifted.points) {
    p.x += k * stride;
    p.y += l * stride;
  }
  const DensityGrid moved = generate_gt_density(shifted, spec, KernelParams{});

  // Compare on the interior where both, pre- and post-shift, see the same
  // relative geometry.
  for (int row = 0; row + l < spec.rows; ++row) {
    for (int col = 0; col + k < spec.cols; ++col) {
      const double a = base.values[spec.index(col, row)];
      const double b = moved.values[spec.index(col + k, row + l)];
      CHECK(a == b);  // bitwise: identical offsets feed identical arithmetic
    }
  }
}

TEST_CASE("density of a point-set union is the cell-wise sum") {
  FrameAnnotation a{"a", 128, 96, {{30.0, 40.0}, {90.5, 20.25}}};
  FrameAnnotation b{"b", 128, 96, {{64.0, 64.0}}};
  FrameAnnotation both{"ab", 128, 96, {}};
  both.points = a.points;
  both.points.insert(both.points.end(), b.points.begin(), b.points.end());

  const GridSpec spec = GridSpec::for_frame(a, 2.0);
  const KernelParams params;
  const DensityGrid ga = generate_gt_density(a, spec, params);
  const DensityGrid gb = generate_gt_density(b, spec, params);
  const DensityGrid gboth = generate_gt_density(both, spec, params);
  for (std::size_t m = 0; m < gboth.values.size(); ++m) {
    CHECK(gboth.values[m] ==
          doctest::Approx(ga.values[m] + gb.values[m]).epsilon(1e-12));
  }
}

TEST_CASE("generated grids are non-negative and reject mismatched specs") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  FrameAnnotation frame{"n", 100, 80, {}};
  for (int k = 0; k < 12; ++k) {
    frame.points.push_back({unit(rng) * 99.0, unit(rng) * 79.0});
  }
  const GridSpec spec = GridSpec::for_frame(frame, 4.0);
  const DensityGrid grid = generate_gt_density(frame, spec, KernelParams{});
  CHECK_NOTHROW(grid.validate());

  GridSpec wrong = spec;
  wrong.cols += 1;
  CHECK_THROWS_AS(generate_gt_density(frame, wrong, KernelParams{}),
                  std::invalid_argument);
}

TEST_CASE("overlay on a zero grid leaves red at zero") {
  const ImageRGB image = ImageRGB::filled(12, 8, 10, 20, 30);
  const DensityGrid grid = grid_of(1.0, 12, 8);
  const ImageRGB out = render_overlay(image, grid);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 12; ++x) {
      const auto px = out.at(x, y);
      CHECK(px[0] == 0);
      CHECK(px[1] == 20);
      CHECK(px[2] == 30);
    }
  }
}

TEST_CASE("single spike saturates exactly one stride block") {
  const int stride = 4;
  const ImageRGB image = ImageRGB::filled(16, 8, 0, 0, 0);
  DensityGrid grid = grid_of(stride, 4, 2);
  grid.values[grid.spec.index(2, 1)] = 0.7;
  const ImageRGB out = render_overlay(image, grid);
  int saturated = 0;
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 16; ++x) {
      const auto px = out.at(x, y);
      if (px[0] == 255) {
        ++saturated;
        CHECK(x / stride == 2);
        CHECK(y / stride == 1);
      } else {
        CHECK(px[0] == 0);
      }
    }
  }
  CHECK(saturated == stride * stride);
}

TEST_CASE("uniform grid renders uniform full red") {
  const ImageRGB image = ImageRGB::filled(6, 6, 1, 2, 3);
  const DensityGrid grid = grid_of(1.0, 6, 6, 0.25);
  const ImageRGB out = render_overlay(image, grid);
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 6; ++x) {
      CHECK(out.at(x, y)[0] == 255);
    }
  }
}

TEST_CASE("overlay rejects an image of the wrong size") {
  const ImageRGB image = ImageRGB::filled(10, 10, 0, 0, 0);
  const DensityGrid grid = grid_of(1.0, 12, 8);
  CHECK_THROWS_AS(render_overlay(image, grid), std::invalid_argument);
}

TEST_CASE("raster round trip is float-exact and headers match") {
  testutil::TempDir tmp;
  FrameAnnotation frame{"r", 56, 40, {{20.0, 18.5}, {44.25, 30.0}}};
  const GridSpec spec = GridSpec::for_frame(frame, 8.0);
  const DensityGrid grid = generate_gt_density(frame, spec, KernelParams{});

  const auto path = tmp.file("grid.cdm");
  write_raster(path, grid);

  const std::string raw = testutil::read_file(path);
  const std::string header = "CDM1 7 5 8\n";
  REQUIRE(raw.substr(0, header.size()) == header);
  CHECK(raw.size() == header.size() + grid.values.size() * 4);

  const DensityGrid back = read_raster(path);
  CHECK(back.spec == grid.spec);
  REQUIRE(back.values.size() == grid.values.size());
  for (std::size_t m = 0; m < grid.values.size(); ++m) {
    CHECK(back.values[m] == static_cast<float>(grid.values[m]));
  }
}

TEST_CASE("raster reader rejects damage") {
  testutil::TempDir tmp;
  const auto bad_magic = tmp.file("bad.cdm");
  testutil::write_file(bad_magic, "XXX1 2 2 1\n0123456789abcdef");
  CHECK_THROWS_AS(read_raster(bad_magic), std::runtime_error);

  const auto truncated = tmp.file("short.cdm");
  testutil::write_file(truncated, "CDM1 2 2 1\n01234567");  // 8 of 16 bytes
  CHECK_THROWS_AS(read_raster(truncated), std::runtime_error);

  CHECK_THROWS_AS(read_raster(tmp.file("absent.cdm")), std::runtime_error);
}
