#pragma once

#include <string>
#include <vector>

namespace crowdcount {

// One external detector output box, corners in pixels.
struct Detection {
  double x1 = 0.0, y1 = 0.0, x2 = 0.0, y2 = 0.0;  // x2 > x1, y2 > y1
  std::string label;
  double score = 0.0;  // [0, 1]

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
};

struct DetectionSet {
  std::string frame_id;
  std::vector<Detection> detections;
};

// Feature-pyramid level for an ROI of the given size:
//   k = floor(k0 + log2(sqrt(w*h) / 224)), clamped to [2, 5].
int fpn_level(double w, double h, int k0 = 4);

// Number of detections labelled "person" with score >= threshold.
int count_persons(const DetectionSet& set, double score_threshold);

// Detections JSON:
//   {"frames":[{"id":"...","detections":[
//       {"bbox":[x1,y1,x2,y2],"label":"person","score":0.97}, ...]}]}
// Unknown fields are tolerated; missing required fields and degenerate
// boxes are rejected naming the frame and detection index.
std::vector<DetectionSet> load_detections(const std::string& path);

}  // namespace crowdcount
