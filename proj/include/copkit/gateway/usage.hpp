#pragma once

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/cop/result.hpp"

namespace copkit {

struct UsageReport {
  std::size_t instances = 0;
  double per_instance_mean_tokens = 0.0;
  TokenUsage totals;
  std::map<std::string, TokenUsage> per_phase;
};

inline UsageReport usage_report(const std::vector<ResultRecord>& run) {
  UsageReport report;
  report.instances = run.size();
  for (const auto& r : run) {
    report.totals += r.usage;
    for (const auto& [phase, u] : r.per_phase) report.per_phase[phase] += u;
  }
  if (!run.empty()) {
    report.per_instance_mean_tokens =
        static_cast<double>(report.totals.total()) / static_cast<double>(run.size());
  }
  return report;
}

inline UsageReport usage_report(const std::vector<RunResult>& run) {
  std::vector<ResultRecord> records;
  records.reserve(run.size());
  for (const auto& r : run) records.push_back(to_record(r));
  return usage_report(records);
}

inline nlohmann::json to_json(const UsageReport& r) {
  nlohmann::json phases = nlohmann::json::object();
  for (const auto& [p, u] : r.per_phase) phases[p] = u;
  return {{"instances", r.instances},
          {"per_instance_mean_tokens", r.per_instance_mean_tokens},
          {"totals", {{"input_tokens", r.totals.input_tokens},
                      {"output_tokens", r.totals.output_tokens},
                      {"total_tokens", r.totals.total()}}},
          {"per_phase", phases}};
}

}  // namespace copkit
