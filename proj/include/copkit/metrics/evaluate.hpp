#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "copkit/core/table.hpp"
#include "copkit/cop/result.hpp"
#include "copkit/forge/instance.hpp"
#include "copkit/gateway/usage.hpp"
#include "copkit/metrics/accuracy.hpp"
#include "copkit/metrics/breakdown.hpp"
#include "copkit/metrics/llm_score.hpp"
#include "copkit/metrics/similarity.hpp"

namespace copkit {

inline const std::vector<std::string>& known_metrics() {
  static const std::vector<std::string> names{"accuracy", "similarity", "llm_score"};
  return names;
}

struct EvalOptions {
  std::vector<std::string> metrics{"accuracy"};
  GroupBy group_by = GroupBy::kNone;
  std::vector<LengthBucket> buckets = default_length_buckets();
  SimilarityScorer similarity;
  /// Required for llm_score.
  const JudgePanel* panel = nullptr;

  void validate() const {
    if (metrics.empty()) throw Error(ErrorCode::kConfigError, "no metrics requested");
    for (const auto& m : metrics) {
      if (std::find(known_metrics().begin(), known_metrics().end(), m) == known_metrics().end()) {
        throw Error(ErrorCode::kConfigError, "unknown metric '" + m + "'");
      }
      if (m == "llm_score" && !panel) throw Error(ErrorCode::kConfigError, "llm_score needs a judge panel");
    }
  }
};

struct ModeReport {
  std::string mode;
  std::size_t results = 0;
  std::size_t errors = 0;
  std::vector<Breakdown> breakdowns;
  UsageReport usage;
  std::vector<std::string> warnings;
};

struct EvalReport {
  std::vector<ModeReport> modes;
};

/// Scores one run (all records of one mode) against gold instances.
/// Percent scale throughout: accuracy and llm_score natively, similarity x100.
inline ModeReport evaluate_run(const std::vector<ResultRecord>& run, const std::vector<Instance>& gold,
                               const EvalOptions& options) {
  options.validate();
  std::map<std::string, const Instance*> by_id;
  for (const auto& in : gold) by_id[in.id] = &in;
  std::vector<std::string> orphans;
  std::set<std::string> seen;
  for (const auto& r : run) {
    if (!by_id.count(r.instance_id)) orphans.push_back(r.instance_id);
    if (!seen.insert(r.instance_id).second) {
      throw Error(ErrorCode::kJoinMismatch, "instance '" + r.instance_id + "' has more than one result");
    }
  }
  if (!orphans.empty()) {
    std::string list;
    for (const auto& o : orphans) list += (list.empty() ? "" : ", ") + o;
    throw Error(ErrorCode::kJoinMismatch, "results without gold: " + list);
  }

  ModeReport report;
  report.mode = run.empty() ? "" : run.front().mode;
  report.results = run.size();
  report.usage = usage_report(run);
  if (run.empty()) report.warnings.push_back("no results to evaluate; metrics are reported as 0.0");

  for (const std::string& metric : options.metrics) {
    std::vector<EvalRow> rows;
    for (const auto& r : run) {
      const Instance& in = *by_id.at(r.instance_id);
      const std::string& pred = r.prediction.next_step_text;
      const bool usable = !r.error && !text::trim_view(pred).empty();
      double value = 0.0;
      if (usable && metric == "accuracy") {
        value = next_step_correct(pred, in.gold_next_step) ? 100.0 : 0.0;
      } else if (usable && metric == "similarity") {
        value = 100.0 * options.similarity(pred, in.gold_next_step);
      } else if (usable && metric == "llm_score") {
        try {
          LlmScore s = llm_score(pred, in.gold_next_step, *options.panel);
          value = s.score_percent;
          for (auto& w : s.warnings) report.warnings.push_back(r.instance_id + ": " + w);
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kAllJudgesFailed) throw;
          report.warnings.push_back(r.instance_id + ": " + e.what() + "; scored 0");
        }
      }
      rows.push_back({r.instance_id, in.domain, in.step_length(), value});
    }
    report.breakdowns.push_back(breakdown_report(rows, options.group_by, metric, options.buckets));
  }
  for (const auto& r : run) {
    if (r.error) ++report.errors;
  }
  return report;
}

inline nlohmann::json to_json(const ModeReport& m) {
  nlohmann::json metrics = nlohmann::json::array();
  for (const auto& b : m.breakdowns) metrics.push_back(to_json(b));
  return {{"mode", m.mode},   {"results", m.results},        {"errors", m.errors},
          {"metrics", metrics}, {"usage", to_json(m.usage)}, {"warnings", m.warnings}};
}

inline nlohmann::json to_json(const EvalReport& r) {
  nlohmann::json modes = nlohmann::json::array();
  for (const auto& m : r.modes) modes.push_back(to_json(m));
  return {{"modes", modes}};
}

/// One table per mode: groups down, metrics across, overall last.
inline std::string render_text(const EvalReport& r) {
  std::string out;
  for (const auto& m : r.modes) {
    if (!out.empty()) out += "\n";
    out += "mode: " + m.mode + "  results: " + std::to_string(m.results) + "  errors: " + std::to_string(m.errors) +
           "  mean tokens: " + format_fixed(m.usage.per_instance_mean_tokens, 1) + "\n";
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header{"group", "n"};
    for (const auto& b : m.breakdowns) header.push_back(b.metric);
    rows.push_back(header);
    if (!m.breakdowns.empty()) {
      const auto& first = m.breakdowns.front();
      for (std::size_t g = 0; g <= first.groups.size(); ++g) {
        const bool overall = g == first.groups.size();
        const GroupRow& gr = overall ? first.overall : first.groups[g];
        std::vector<std::string> row{gr.group, std::to_string(gr.count)};
        for (const auto& b : m.breakdowns) row.push_back(format_fixed(overall ? b.overall.value : b.groups[g].value));
        rows.push_back(row);
      }
    }
    out += render_table(rows);
  }
  return out;
}

inline std::string render_csv(const EvalReport& r) {
  std::string out = "mode,metric,group_by,group,count,value\n";
  for (const auto& m : r.modes) {
    for (const auto& b : m.breakdowns) {
      auto line = [&](const GroupRow& g) {
        out += csv_field(m.mode) + "," + b.metric + "," + to_string(b.group_by) + "," + csv_field(g.group) + "," +
               std::to_string(g.count) + "," + format_fixed(g.value, 4) + "\n";
      };
      for (const auto& g : b.groups) line(g);
      line(b.overall);
    }
  }
  return out;
}

}  // namespace copkit
