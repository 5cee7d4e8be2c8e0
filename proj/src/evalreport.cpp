#include "crowdcount/evalreport.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/core.h>
#include <json.hpp>

namespace crowdcount {

double mae(const std::vector<double>& errors) {
  if (errors.empty()) {
    throw std::invalid_argument("metrics: MAE of an empty error list");
  }
  double sum = 0.0;
  for (double e : errors) sum += std::abs(e);
  return sum / static_cast<double>(errors.size());
}

double rmse(const std::vector<double>& errors) {
  if (errors.empty()) {
    throw std::invalid_argument("metrics: RMSE of an empty error list");
  }
  double sum = 0.0;
  for (double e : errors) sum += e * e;
  return std::sqrt(sum / static_cast<double>(errors.size()));
}

namespace {

void validate_record(const CountRecord& rec) {
  if (rec.scenario.empty()) {
    throw std::invalid_argument("report: record with empty scenario name");
  }
  if (rec.method.empty()) {
    throw std::invalid_argument(fmt::format(
        "report: scenario '{}' has a record with an empty method", rec.scenario));
  }
  if (rec.ground_truth < 0) {
    throw std::invalid_argument(
        fmt::format("report: scenario '{}' ground truth must be >= 0, got {}",
                    rec.scenario, rec.ground_truth));
  }
  if (!std::isfinite(rec.estimated) || rec.estimated < 0.0) {
    throw std::invalid_argument(fmt::format(
        "report: scenario '{}' method '{}' estimate must be finite and >= 0, "
        "got {}",
        rec.scenario, rec.method, rec.estimated));
  }
}

}  // namespace

ScenarioReport build_report(const std::vector<CountRecord>& records) {
  if (records.empty()) {
    throw std::invalid_argument("report: no count records");
  }

  std::set<std::string> method_set;
  // scenario -> (method -> estimated), plus the agreed ground truth.
  std::map<std::string, std::map<std::string, double>> estimates;
  std::map<std::string, int> truths;
  for (const CountRecord& rec : records) {
    validate_record(rec);
    method_set.insert(rec.method);
    auto [it, inserted] = estimates[rec.scenario].try_emplace(rec.method,
                                                              rec.estimated);
    if (!inserted) {
      throw std::invalid_argument(
          fmt::format("report: duplicate record for scenario '{}' method '{}'",
                      rec.scenario, rec.method));
    }
    auto [truth_it, fresh] = truths.try_emplace(rec.scenario, rec.ground_truth);
    if (!fresh && truth_it->second != rec.ground_truth) {
      throw std::invalid_argument(fmt::format(
          "report: scenario '{}' lists ground truths {} and {}", rec.scenario,
          truth_it->second, rec.ground_truth));
    }
  }

  ScenarioReport report;
  report.methods.assign(method_set.begin(), method_set.end());

  std::vector<std::vector<double>> per_method_errors(report.methods.size());
  for (const auto& [scenario, by_method] : estimates) {
    ScenarioReport::Row row;
    row.scenario = scenario;
    row.ground_truth = truths.at(scenario);
    for (std::size_t k = 0; k < report.methods.size(); ++k) {
      auto it = by_method.find(report.methods[k]);
      if (it == by_method.end()) {
        throw std::invalid_argument(
            fmt::format("report: scenario '{}' is missing method '{}'",
                        scenario, report.methods[k]));
      }
      row.estimated.push_back(it->second);
      const double err = std::abs(it->second - row.ground_truth);
      row.abs_error.push_back(err);
      per_method_errors[k].push_back(err);
    }
    report.rows.push_back(std::move(row));
  }
  for (const std::vector<double>& errs : per_method_errors) {
    report.summary.push_back({mae(errs), rmse(errs)});
  }
  return report;
}

std::vector<CountRecord> load_counts_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error(fmt::format("report: cannot open '{}'", path));
  }
  std::vector<CountRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1 && line == "scenario,method,estimated,ground_truth") {
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 4) {
      throw std::invalid_argument(fmt::format(
          "report: '{}' line {}: expected 4 comma-separated fields, got {}",
          path, line_no, fields.size()));
    }
    CountRecord rec;
    rec.scenario = fields[0];
    rec.method = fields[1];
    try {
      std::size_t used = 0;
      rec.estimated = std::stod(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
      rec.ground_truth = std::stoi(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw std::invalid_argument(fmt::format(
          "report: '{}' line {}: cannot parse counts from '{}', '{}'", path,
          line_no, fields[2], fields[3]));
    }
    records.push_back(std::move(rec));
  }
  if (records.empty()) {
    throw std::invalid_argument(
        fmt::format("report: '{}' holds no count records", path));
  }
  return records;
}

std::string render_markdown(const ScenarioReport& report) {
  std::string out = "# Count comparison\n\n";

  out += "| Video |";
  for (const std::string& m : report.methods) out += fmt::format(" {} |", m);
  out += " Ground Truth |";
  for (const std::string& m : report.methods) {
    out += fmt::format(" {} error |", m);
  }
  out += "\n| --- |";
  for (std::size_t k = 0; k < 2 * report.methods.size() + 1; ++k) {
    out += " ---: |";
  }
  out += "\n";
  for (const ScenarioReport::Row& row : report.rows) {
    out += fmt::format("| {} |", row.scenario);
    for (double est : row.estimated) {
      out += fmt::format(" {} |", std::llround(est));
    }
    out += fmt::format(" {} |", row.ground_truth);
    for (double err : row.abs_error) out += fmt::format(" {:g} |", err);
    out += "\n";
  }

  out += "\n## Metric summary\n\n| Metric |";
  for (const std::string& m : report.methods) out += fmt::format(" {} |", m);
  out += "\n| --- |";
  for (std::size_t k = 0; k < report.methods.size(); ++k) out += " ---: |";
  out += "\n| MAE |";
  for (const ScenarioReport::MethodSummary& s : report.summary) {
    out += fmt::format(" {:.1f} |", s.mae);
  }
  out += "\n| RMSE |";
  for (const ScenarioReport::MethodSummary& s : report.summary) {
    out += fmt::format(" {:.1f} |", s.rmse);
  }
  out +=
      "\n\nMAE is the primary comparison metric; RMSE is a supplementary "
      "metric.\n";
  return out;
}

std::string report_to_json(const ScenarioReport& report) {
  nlohmann::ordered_json doc;
  doc["methods"] = report.methods;
  doc["rows"] = nlohmann::ordered_json::array();
  for (const ScenarioReport::Row& row : report.rows) {
    nlohmann::ordered_json r;
    r["scenario"] = row.scenario;
    r["estimated"] = row.estimated;
    r["ground_truth"] = row.ground_truth;
    r["abs_error"] = row.abs_error;
    doc["rows"].push_back(std::move(r));
  }
  doc["summary"] = nlohmann::ordered_json::array();
  for (const ScenarioReport::MethodSummary& s : report.summary) {
    doc["summary"].push_back({{"mae", s.mae}, {"rmse", s.rmse}});
  }
  return doc.dump(2) + "\n";
}

ScenarioReport report_from_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(
        fmt::format("report: invalid report JSON: {}", e.what()));
  }
  try {
    ScenarioReport report;
    report.methods = doc.at("methods").get<std::vector<std::string>>();
    for (const auto& r : doc.at("rows")) {
      ScenarioReport::Row row;
      row.scenario = r.at("scenario").get<std::string>();
      row.estimated = r.at("estimated").get<std::vector<double>>();
      row.ground_truth = r.at("ground_truth").get<int>();
      row.abs_error = r.at("abs_error").get<std::vector<double>>();
      report.rows.push_back(std::move(row));
    }
    for (const auto& s : doc.at("summary")) {
      report.summary.push_back(
          {s.at("mae").get<double>(), s.at("rmse").get<double>()});
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(
        fmt::format("report: report JSON missing fields: {}", e.what()));
  }
}

}  // namespace crowdcount
