#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace crowdcount {

// Pixel-space point. x is the column (rightward), y the row (downward),
// origin at the top-left image corner. Sub-pixel coordinates are allowed.
struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Head-point annotations for a single frame. Point order is stable: index n
// identifies head label n everywhere else in the toolkit. Empty frames are
// legal.
struct FrameAnnotation {
  std::string frame_id;
  int width = 0;   // pixels, >= 1
  int height = 0;  // pixels, >= 1
  std::vector<Point> points;

  int head_count() const { return static_cast<int>(points.size()); }

  // Throws std::invalid_argument naming the frame and the offending point.
  void validate() const;
};

// Rectangular evaluation grid over a frame. Cell (col, row) covers the pixel
// block [col*stride, (col+1)*stride) x [row*stride, (row+1)*stride) and is
// represented by its center, so stride=1 reproduces per-pixel evaluation and
// stride=8 mimics a 1/8-resolution network output.
struct GridSpec {
  double stride = 1.0;  // pixels per cell, > 0
  int cols = 0;
  int rows = 0;

  // cols = ceil(width/stride), rows = ceil(height/stride).
  static GridSpec for_frame(const FrameAnnotation& frame, double stride);

  std::size_t size() const {
    return static_cast<std::size_t>(cols) * static_cast<std::size_t>(rows);
  }
  Point cell_center(int col, int row) const {
    return {(col + 0.5) * stride, (row + 0.5) * stride};
  }
  std::size_t index(int col, int row) const {
    return static_cast<std::size_t>(row) * cols + col;
  }
  // True when this grid is exactly the one derived from an image of the
  // given pixel dimensions.
  bool covers(int width, int height) const;

  bool operator==(const GridSpec&) const = default;

  void validate() const;
};

// Annotation JSON:
//   {"frames":[{"id":"...","width":856,"height":480,"points":[[x,y],...]}]}
std::vector<FrameAnnotation> load_annotations(const std::string& path);
void save_annotations(const std::string& path,
                      const std::vector<FrameAnnotation>& frames);

// Regular rows x cols point lattice starting at (margin, margin) with the
// given spacing; image dimensions are sized to contain every point plus the
// margin. Test-instance generator.
FrameAnnotation synth_lattice(int rows, int cols, double spacing,
                              double margin);

}  // namespace crowdcount
