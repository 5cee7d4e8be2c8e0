#include "crowdcount/detect_count.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <fmt/core.h>
#include <json.hpp>

namespace crowdcount {

int fpn_level(double width, double height, int k0) {
  if (!(width > 0.0) || !(height > 0.0)) {
    throw std::invalid_argument(fmt::format(
        "fpn_level: box sides must be positive, got {}x{}", width, height));
  }
  const double raw =
      k0 + std::log2(std::sqrt(width * height) / 224.0);
  const int level = static_cast<int>(std::floor(raw));
  return std::clamp(level, 2, 5);
}

int count_persons(const DetectionSet& set, double score_threshold) {
  if (!(score_threshold >= 0.0) || !(score_threshold <= 1.0)) {
    throw std::invalid_argument(fmt::format(
        "count_persons: threshold must be in [0, 1], got {}", score_threshold));
  }
  int count = 0;
  for (const Detection& det : set.detections) {
    if (det.label == "person" && det.score >= score_threshold) ++count;
  }
  return count;
}

namespace {

Detection parse_detection(const nlohmann::json& node, const std::string& frame,
                          std::size_t index) {
  const auto fail = [&](const std::string& what) {
    throw std::invalid_argument(fmt::format(
        "detections: frame '{}' detection {}: {}", frame, index, what));
  };
  if (!node.is_object()) fail("expected an object");
  if (!node.contains("bbox") || !node["bbox"].is_array() ||
      node["bbox"].size() != 4) {
    fail("'bbox' must be an array of four numbers [x1, y1, x2, y2]");
  }
  for (const auto& v : node["bbox"]) {
    if (!v.is_number()) fail("'bbox' must contain only numbers");
  }
  if (!node.contains("label") || !node["label"].is_string()) {
    fail("missing string field 'label'");
  }
  if (!node.contains("score") || !node["score"].is_number()) {
    fail("missing numeric field 'score'");
  }

  Detection det;
  det.x1 = node["bbox"][0].get<double>();
  det.y1 = node["bbox"][1].get<double>();
  det.x2 = node["bbox"][2].get<double>();
  det.y2 = node["bbox"][3].get<double>();
  det.label = node["label"].get<std::string>();
  det.score = node["score"].get<double>();

  if (!(det.x2 > det.x1) || !(det.y2 > det.y1)) {
    fail(fmt::format("degenerate box [{}, {}, {}, {}]", det.x1, det.y1, det.x2,
                     det.y2));
  }
  if (!std::isfinite(det.score) || det.score < 0.0 || det.score > 1.0) {
    fail(fmt::format("score {} outside [0, 1]", det.score));
  }
  return det;
}

}  // namespace

std::vector<DetectionSet> load_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(
        fmt::format("detections: cannot open '{}'", path));
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(
        fmt::format("detections: '{}' is not valid JSON: {}", path, e.what()));
  }
  if (!doc.is_object() || !doc.contains("frames") || !doc["frames"].is_array()) {
    throw std::invalid_argument(fmt::format(
        "detections: '{}' must carry an array field 'frames'", path));
  }

  std::vector<DetectionSet> sets;
  sets.reserve(doc["frames"].size());
  for (const auto& node : doc["frames"]) {
    if (!node.is_object() || !node.contains("id") || !node["id"].is_string()) {
      throw std::invalid_argument(fmt::format(
          "detections: '{}' frame {} must carry a string field 'id'", path,
          sets.size()));
    }
    if (!node.contains("detections") || !node["detections"].is_array()) {
      throw std::invalid_argument(fmt::format(
          "detections: '{}' frame '{}' must carry an array field 'detections'",
          path, node["id"].get<std::string>()));
    }
    DetectionSet set;
    set.frame_id = node["id"].get<std::string>();
    set.detections.reserve(node["detections"].size());
    for (std::size_t i = 0; i < node["detections"].size(); ++i) {
      set.detections.push_back(
          parse_detection(node["detections"][i], set.frame_id, i));
    }
    sets.push_back(std::move(set));
  }
  return sets;
}

}  // namespace crowdcount
