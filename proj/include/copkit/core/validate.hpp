#pragma once

#include <string>
#include <vector>

#include "copkit/core/text.hpp"
#include "copkit/core/types.hpp"

namespace copkit {

/// Minimum step count for a procedure to enter a benchmark.
inline constexpr std::size_t kMinBenchmarkSteps = 3;

struct Violation {
  std::string kind;  // "empty_text", "bad_index", "non_contiguous", "too_short", "empty_id"
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
};

inline ValidationReport validate_procedure(const Procedure& p) {
  ValidationReport report;
  if (p.id.empty()) report.violations.push_back({"empty_id", "procedure id is empty"});
  for (std::size_t i = 0; i < p.steps.size(); ++i) {
    const Step& s = p.steps[i];
    if (text::trim_view(s.text).empty()) {
      report.violations.push_back({"empty_text", "step at position " + std::to_string(i + 1) + " has empty text"});
    }
    if (s.index < 1) {
      report.violations.push_back({"bad_index", "step index " + std::to_string(s.index) + " < 1"});
    } else if (s.index != static_cast<int>(i + 1)) {
      report.violations.push_back({"non_contiguous", "expected index " + std::to_string(i + 1) + ", found " +
                                                         std::to_string(s.index)});
    }
  }
  if (p.steps.size() < kMinBenchmarkSteps) {
    report.violations.push_back({"too_short", "procedure has " + std::to_string(p.steps.size()) +
                                                  " steps, benchmark minimum is " +
                                                  std::to_string(kMinBenchmarkSteps)});
  }
  return report;
}

}  // namespace copkit
