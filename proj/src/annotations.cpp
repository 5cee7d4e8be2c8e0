#include "crowdcount/annotations.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/core.h>
#include "json.hpp"

namespace crowdcount {

void FrameAnnotation::validate() const {
  if (width < 1 || height < 1) {
    throw std::invalid_argument(fmt::format(
        "annotations: frame '{}' has non-positive dimensions {}x{}", frame_id,
        width, height));
  }
  for (std::size_t n = 0; n < points.size(); ++n) {
    const Point& p = points[n];
    if (!(p.x >= 0.0 && p.x < width && p.y >= 0.0 && p.y < height)) {
      throw std::invalid_argument(fmt::format(
          "annotations: frame '{}' point {} at ({}, {}) lies outside the "
          "{}x{} image",
          frame_id, n, p.x, p.y, width, height));
    }
  }
}

GridSpec GridSpec::for_frame(const FrameAnnotation& frame, double stride) {
  if (!(stride > 0.0)) {
    throw std::invalid_argument(
        fmt::format("grid: stride must be positive, got {}", stride));
  }
  frame.validate();
  GridSpec spec;
  spec.stride = stride;
  spec.cols = static_cast<int>(std::ceil(frame.width / stride));
  spec.rows = static_cast<int>(std::ceil(frame.height / stride));
  return spec;
}

bool GridSpec::covers(int width, int height) const {
  if (!(stride > 0.0) || cols < 1 || rows < 1) return false;
  return cols == static_cast<int>(std::ceil(width / stride)) &&
         rows == static_cast<int>(std::ceil(height / stride));
}

void GridSpec::validate() const {
  if (!(stride > 0.0) || cols < 1 || rows < 1) {
    throw std::invalid_argument(fmt::format(
        "grid: invalid spec stride={} cols={} rows={}", stride, cols, rows));
  }
}

namespace {

FrameAnnotation parse_frame(const nlohmann::json& jf, std::size_t index) {
  if (!jf.is_object()) {
    throw std::invalid_argument(
        fmt::format("annotations: frame entry {} is not an object", index));
  }
  FrameAnnotation frame;
  if (!jf.contains("id") || !jf["id"].is_string()) {
    throw std::invalid_argument(
        fmt::format("annotations: frame entry {} is missing a string 'id'", index));
  }
  frame.frame_id = jf["id"].get<std::string>();
  for (const char* key : {"width", "height"}) {
    if (!jf.contains(key) || !jf[key].is_number_integer()) {
      throw std::invalid_argument(fmt::format(
          "annotations: frame '{}' is missing integer '{}'", frame.frame_id, key));
    }
  }
  frame.width = jf["width"].get<int>();
  frame.height = jf["height"].get<int>();
  if (!jf.contains("points") || !jf["points"].is_array()) {
    throw std::invalid_argument(fmt::format(
        "annotations: frame '{}' is missing a 'points' array", frame.frame_id));
  }
  for (std::size_t n = 0; n < jf["points"].size(); ++n) {
    const auto& jp = jf["points"][n];
    if (!jp.is_array() || jp.size() != 2 || !jp[0].is_number() ||
        !jp[1].is_number()) {
      throw std::invalid_argument(fmt::format(
          "annotations: frame '{}' point {} must be a [x, y] number pair",
          frame.frame_id, n));
    }
    frame.points.push_back({jp[0].get<double>(), jp[1].get<double>()});
  }
  frame.validate();
  return frame;
}

}  // namespace

std::vector<FrameAnnotation> load_annotations(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(
        fmt::format("annotations: cannot open '{}'", path));
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(
        fmt::format("annotations: '{}' is not valid JSON: {}", path, e.what()));
  }
  if (!doc.is_object() || !doc.contains("frames") || !doc["frames"].is_array()) {
    throw std::invalid_argument(fmt::format(
        "annotations: '{}' must be an object with a 'frames' array", path));
  }
  std::vector<FrameAnnotation> frames;
  for (std::size_t i = 0; i < doc["frames"].size(); ++i) {
    frames.push_back(parse_frame(doc["frames"][i], i));
  }
  return frames;
}

void save_annotations(const std::string& path,
                      const std::vector<FrameAnnotation>& frames) {
  nlohmann::ordered_json doc;
  doc["frames"] = nlohmann::ordered_json::array();
  for (const FrameAnnotation& frame : frames) {
    frame.validate();
    nlohmann::ordered_json jf;
    jf["id"] = frame.frame_id;
    jf["width"] = frame.width;
    jf["height"] = frame.height;
    jf["points"] = nlohmann::ordered_json::array();
    for (const Point& p : frame.points) {
      jf["points"].push_back({p.x, p.y});
    }
    doc["frames"].push_back(std::move(jf));
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error(
        fmt::format("annotations: cannot write '{}'", path));
  }
  out << doc.dump(2) << "\n";
}

FrameAnnotation synth_lattice(int rows, int cols, double spacing,
                              double margin) {
  if (rows < 1 || cols < 1) {
    throw std::invalid_argument(fmt::format(
        "synth_lattice: rows and cols must be >= 1, got {}x{}", rows, cols));
  }
  if (!(spacing > 0.0) || margin < 0.0) {
    throw std::invalid_argument(
        fmt::format("synth_lattice: need spacing > 0 and margin >= 0, got "
                    "spacing={} margin={}",
                    spacing, margin));
  }
  FrameAnnotation frame;
  frame.frame_id = fmt::format("lattice_{}x{}", rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      frame.points.push_back({margin + c * spacing, margin + r * spacing});
    }
  }
  const double max_x = margin + (cols - 1) * spacing;
  const double max_y = margin + (rows - 1) * spacing;
  // Strictly larger than the farthest point so the bound invariant holds
  // even at margin 0.
  frame.width = std::max(static_cast<int>(std::ceil(max_x + margin)),
                         static_cast<int>(std::floor(max_x)) + 1);
  frame.height = std::max(static_cast<int>(std::ceil(max_y + margin)),
                          static_cast<int>(std::floor(max_y)) + 1);
  frame.validate();
  return frame;
}

}  // namespace crowdcount
