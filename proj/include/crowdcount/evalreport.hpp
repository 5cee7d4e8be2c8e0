#pragma once

#include <string>
#include <vector>

namespace crowdcount {

// One (scenario, method) count measurement against ground truth.
struct CountRecord {
  std::string scenario;
  std::string method;  // e.g. "density-map", "detect-then-count"
  double estimated = 0.0;
  int ground_truth = 0;
};

struct ScenarioReport {
  std::vector<std::string> methods;  // sorted, shared by every row

  struct Row {
    std::string scenario;
    std::vector<double> estimated;  // parallel to methods
    int ground_truth = 0;
    std::vector<double> abs_error;  // |estimated - ground_truth|

    bool operator==(const Row&) const = default;
  };
  std::vector<Row> rows;  // sorted by scenario name

  struct MethodSummary {
    double mae = 0.0;
    double rmse = 0.0;

    bool operator==(const MethodSummary&) const = default;
  };
  std::vector<MethodSummary> summary;  // parallel to methods

  bool operator==(const ScenarioReport&) const = default;
};

double mae(const std::vector<double>& errors);
double rmse(const std::vector<double>& errors);

// Aggregates records into the per-scenario comparison. Every (scenario,
// method) pair at most once; all scenarios must share the same method set
// and agree on their ground truth.
ScenarioReport build_report(const std::vector<CountRecord>& records);

// CSV "scenario,method,estimated,ground_truth" (header optional).
std::vector<CountRecord> load_counts_csv(const std::string& path);

// Count table plus a metric summary. Estimates are rounded to the nearest
// integer here; the JSON form keeps full precision. Output is byte-stable
// for identical inputs.
std::string render_markdown(const ScenarioReport& report);

std::string report_to_json(const ScenarioReport& report);
ScenarioReport report_from_json(const std::string& text);

}  // namespace crowdcount
